// Copyright 2026 The qemsense Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef QEMSENSE_CHANNELS_HPP
#define QEMSENSE_CHANNELS_HPP

#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "qemsense/mitigation.hpp"
#include "qemsense/qmatrix.hpp"

// Time-dependent single-qubit noise in the precession frame (z is the
// population axis) and the closed-form mitigation plans for it. Times are in
// microseconds and rates in 1/us throughout.
namespace qemsense {

/// A real-valued rate r(t) together with its integral from 0 to t.
class RateFunction {
  public:
    static RateFunction constant(double value);
    /// amplitude * sin(frequency * t) + offset
    static RateFunction sinusoidal(double amplitude, double frequency, double offset);
    /// Piecewise-linear through (t, value) points, held constant outside them.
    static RateFunction table(std::vector<std::pair<double, double>> points);
    /// Integrated numerically by adaptive Simpson quadrature.
    static RateFunction custom(std::function<double(double)> f);

    double operator()(double t) const;
    double integral(double t) const;

  private:
    struct Constant {
        double value;
    };
    struct Sinusoidal {
        double amplitude, frequency, offset;
    };
    struct Table {
        std::vector<std::pair<double, double>> points;
    };
    struct Custom {
        std::function<double(double)> f;
    };
    using Payload = std::variant<Constant, Sinusoidal, Table, Custom>;

    explicit RateFunction(Payload p) : payload_(std::move(p)) {}
    Payload payload_;
};

/// Adaptive Simpson quadrature with absolute tolerance `abs_tol` and at most
/// 2^max_depth subintervals.
double adaptive_simpson(const std::function<double(double)> &f, double a, double b,
                        double abs_tol = 1e-10, int max_depth = 20);

struct RateFunctions {
    RateFunction gamma = RateFunction::constant(0.0);        // decay rate
    RateFunction omega_noise = RateFunction::constant(0.0);  // detuning
};

struct AccumulatedRates {
    double big_gamma;  // integral of gamma
    double phi;        // integral of omega_noise
};

/// Throws InvalidRates for non-finite values and Unphysical for a negative
/// accumulated decay.
AccumulatedRates integrate_rates(const RateFunctions &rates, double t);

ChannelRep dephasing_channel(double big_gamma, double phi);
ChannelRep relaxation_channel(double big_gamma, double phi);

struct ThermalParams {
    double gamma0;     // zero-temperature decay rate
    double n_thermal;  // mean thermal occupation

    double gamma1() const { return gamma0 * (n_thermal + 1.0); }  // downward
    double gamma2() const { return gamma0 * n_thermal; }          // upward
    double total_rate() const { return gamma1() + gamma2(); }
    void validate() const;
};

ChannelRep thermalization_channel(const ThermalParams &params, double t, double phi);

/// Pure dephasing with complex coherence factor w: rho_01 -> w rho_01.
ChannelRep coherence_channel(Complex w);

enum class NoiseKind { Dephasing, Relaxation, Thermalization, CustomPtm };

struct NoiseChannelSpec {
    NoiseKind kind = NoiseKind::Dephasing;
    RateFunctions rates;
    std::optional<ThermalParams> thermal;
    RealMat4 custom_ptm = RealMat4::Identity();
};

ChannelRep noise_channel(const NoiseChannelSpec &spec, double t);

/// Closed-form plan for the exact inverse of the noise channel at time t.
/// CustomPtm raises UseNumericalPipeline.
MitigationPlan analytic_plan(const NoiseChannelSpec &spec, double t);

/// Closed-form plan for a coherence channel (the dephasing plan with
/// Gamma = -ln|w| and phi = arg w).
MitigationPlan analytic_coherence_plan(Complex w);

/// The R_y(pi/2) rotation taking the precession frame to the measurement frame.
Rotation measurement_frame();

/// U c U^dag for the unitary of `rotation`.
ChannelRep frame_conjugate(const ChannelRep &c, const Rotation &rotation);

}  // namespace qemsense

#endif
