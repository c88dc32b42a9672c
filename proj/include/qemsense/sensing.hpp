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


#ifndef QEMSENSE_SENSING_HPP
#define QEMSENSE_SENSING_HPP

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "qemsense/channels.hpp"
#include "qemsense/mitigation.hpp"
#include "qemsense/spinbath.hpp"

// Ramsey magnetometry with mitigated readout. Fields are in nT, times in us,
// AC angular frequencies in rad/us, sensitivities in nT/sqrt(Hz).
namespace qemsense {

enum class SensingMode { DC, AC };

struct SensingSpec {
    SensingMode mode = SensingMode::DC;
    double field_nt = 0.0;
    double omega_s = 0.0;
    double gamma_e = constants::gamma_e;
    std::vector<double> tau;
    bool measure_full_half_periods = true;
};

/// DC: gamma_e B tau. AC with pi pulses at the field's zero crossings:
/// gamma_e B times the integral of |cos(omega t)|. Throws GridViolation for an
/// AC time off the half-period grid when measure_full_half_periods is set.
double accumulate_phase(const SensingSpec &spec, double tau);

/// d Theta / d B in rad/nT.
double phase_field_derivative(const SensingSpec &spec, double tau);

/// AC pi-pulse times (pi/omega)(n - 1/2) before tau; empty for DC.
std::vector<double> pi_pulse_times(const SensingSpec &spec, double tau);

struct IdealSignal {
    double value;
    bool linear;  // |Theta| < 0.1
};

IdealSignal ideal_signal(double theta);

/// (I + sin(Theta) Z + cos(Theta) X) / 2 in the measurement frame.
DensityMatrix ideal_state(double theta);

/// Noise given in the measurement frame.
DensityMatrix noisy_state(double theta, const ChannelRep &noise);

/// Shots per circuit in plan order: round(fraction * N) each, the rounding
/// residue to the first plus circuit, at least one shot per circuit. Throws
/// TooFewShots when N is smaller than the number of circuits.
std::vector<std::int64_t> allocate_shots(const MitigationPlan &plan, std::int64_t n);

/// The standard four-circuit layout (plus, plus, minus, minus) for overhead p.
std::vector<std::int64_t> allocate_shots(double p, std::int64_t n);

/// sum_j (+-w_j) S_j
double combine_signals(const MitigationPlan &plan, const std::vector<double> &s);

/// sqrt((2p+1)/N * sum_j w_j (1 - S_j^2)); for four equal-weight circuits this
/// is sqrt((2p+1)/(2N)) [p(2 - S1-^2 - S2-^2) + (1+p)(2 - S1+^2 - S2+^2)]^(1/2).
double mitigated_std(const MitigationPlan &plan, const std::vector<double> &s, std::int64_t n);

/// <Z> after each circuit, without shot noise.
std::vector<double> exact_circuit_signals(const MitigationPlan &plan, const DensityMatrix &rho);

struct MitigatedEstimate {
    std::vector<double> s_values;
    double s_mitigated = 0.0;
    double std = 0.0;
    std::vector<std::int64_t> shots_used;
    double p = 0.0;
};

/// Binomial shot sampling of every circuit; circuit j draws from
/// stream_rng(seed, stream, j).
MitigatedEstimate mitigated_estimate(const MitigationPlan &plan, const DensityMatrix &rho_noisy, std::int64_t n,
                                     std::uint64_t seed, std::uint64_t stream = 0);

struct SensitivityReport {
    double eta_mitigated;
    double eta_naqs;
    double eta_bound;
    double partial_b_theta;
    bool nonlinear;  // |Theta| > 0.3
};

/// delta_s: standard deviation of the mitigated signal with n shots;
/// s_noisy, noise_zz: unmitigated signal and Z-Z element of the noise PTM.
/// Throws DegenerateProtocol when d Theta / d B vanishes.
SensitivityReport sensitivity(double delta_s, double s_noisy, double noise_zz, const SensingSpec &spec,
                              double tau, double p, std::int64_t n);

enum class Strategy { None, Inverse, Optimized, Analytic };

/// Either a rate-based channel or bath coherence factors W(tau) on the grid.
using NoiseSource = std::variant<NoiseChannelSpec, CoherenceCurve>;

struct SweepOptions {
    Strategy strategy = Strategy::Optimized;
    std::int64_t shots = 10000;
    std::uint64_t seed = 0;
    int threads = 1;
    OptimizeOptions optimize;
};

struct SweepRow {
    double tau = 0.0;
    double theta = 0.0;
    bool invertible = true;
    double p = 0.0;  // +inf when the noise cannot be inverted
    double s_ideal = 0.0;
    double s_noisy = 0.0;
    std::optional<double> s_mitigated;
    std::optional<double> s_mitigated_std;
    std::optional<double> eta_mitigated;
    std::optional<double> eta_naqs;
    std::optional<double> eta_bound;
    // the same quantities from exact circuit signals
    std::optional<double> s_mitigated_exact;
    std::optional<double> std_exact;
    std::optional<double> eta_mitigated_exact;
    std::size_t circuits_used = 0;
    std::vector<std::int64_t> shots;
    bool nonlinear = false;
};

/// Channel acting on the sensor at tau, in the precession frame.
ChannelRep source_channel(const NoiseSource &source, const std::vector<double> &grid, std::size_t index);

/// The plan a sweep uses at grid point `index` (strategy None is rejected).
/// The noise is taken to the measurement frame first.
MitigationPlan sweep_plan(const NoiseSource &source, const std::vector<double> &grid, std::size_t index,
                          const SweepOptions &options);

std::vector<SweepRow> sweep(const SensingSpec &spec, const NoiseSource &source, const SweepOptions &options);

}  // namespace qemsense

#endif
