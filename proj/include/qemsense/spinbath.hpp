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


#ifndef QEMSENSE_SPINBATH_HPP
#define QEMSENSE_SPINBATH_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "qemsense/qmatrix.hpp"

// Surface electron spin bath of a shallow NV centre. The NV sits at the
// origin and the bath spins on the plane z = d_NV; the bias field is along z.
// Lengths are in nm, times in us, couplings in kHz (MHz inside formulas).
namespace qemsense {

namespace constants {
inline constexpr double gamma_e = 1.760859e11;       // rad s^-1 T^-1
inline constexpr double mu0 = 1.25663706212e-6;      // T m / A
inline constexpr double hbar = 1.054571817e-34;      // J s
}  // namespace constants

/// hbar mu0 gamma_e^2 / (8 pi^2) in MHz nm^3 (about 52.04).
double dipolar_prefactor();

/// Signal angular frequency gamma_e * B in rad/us for B in nT.
double larmor_shift(double field_nt, double gamma_e = constants::gamma_e);

struct BathConfiguration {
    std::vector<Vec3> positions;  // sampled spins
    double nv_depth = 0.0;
    double density = 0.0;
    double r_cut = 0.0;
    std::optional<Vec3> fixed_spin;

    /// fixed spin (if any) first, then the sampled spins
    std::vector<Vec3> all_spins() const;
};

/// Poisson count and uniform positions in the disc of radius r_cut.
/// Throws TooManySpins when the mean count exceeds 1e6.
BathConfiguration sample_configuration(double density, double r_cut, double nv_depth, std::mt19937_64 &rng,
                                       std::optional<Vec3> fixed_spin = std::nullopt);

/// Keeps only the spins within `r_cut` of the NV axis (the fixed spin stays).
BathConfiguration restrict_radius(const BathConfiguration &config, double r_cut);

struct DipolarCoupling {
    double a_zz;        // kHz, K (3 n_z^2 - 1) / r^3
    double a_flipflop;  // kHz, K (1 - 3 n_z^2) / r^3
};

/// Secular dipolar couplings for a separation vector. Throws Singular at r = 0.
DipolarCoupling dipolar_coupling(const Vec3 &separation);

/// 1/|a_zz| in us for a spin at lateral distance r from the NV axis.
double phase_time(double nv_depth, double r_lateral);

/// Distance at which the flip-flop coupling equals 1/tau.
double flipflop_radius(double tau_us);

/// Per-spin NV couplings in MHz, in all_spins() order.
std::vector<double> nv_couplings_mhz(const BathConfiguration &config);

struct CoherenceCurve {
    static constexpr int kExact = -1;

    std::vector<double> times;
    std::vector<Complex> values;
    int order = 0;
};

struct FrequencyHistogram {
    std::vector<double> shifts;  // angular frequency shifts, rad/us

    double mean() const;
    double stddev() const;  // sample standard deviation
    /// Equal-width bin counts over [min, max].
    std::vector<std::size_t> counts(std::size_t bins) const;
};

struct MeanFieldResult {
    CoherenceCurve curve;
    FrequencyHistogram histogram;
};

/// Mean-field coherence averaged over configurations and all bath eigenstates,
/// times the signal phase exp(i gamma_e B t); the histogram holds
/// `states_per_configuration` sampled shifts per configuration.
MeanFieldResult mf_signal(const std::vector<BathConfiguration> &configs, double field_nt,
                          const std::vector<double> &tau, std::uint64_t seed, int states_per_configuration = 16,
                          int threads = 1);

/// T2* = sqrt(2) / sigma_f. Needs at least 30 shifts; zero spread raises InfiniteT2.
double estimate_t2star(const FrequencyHistogram &histogram);

/// Least-squares fit of |W(t)| = exp(-(t/T)^2) over points with |W| >= floor;
/// the default floor is 1/e, the window in which T is the decay time.
double fit_gaussian_t2(const CoherenceCurve &curve, double floor = 0.36787944117144233);

/// Bath computational state, +1 (up) or -1 (down) per spin in all_spins() order.
using BathState = std::vector<int>;

BathState sample_bath_state(std::size_t n, std::mt19937_64 &rng);

struct GcceOptions {
    bool flipflop = true;
};

/// Cluster-expansion coherence for one pure bath state. Order 0 and 1 are the
/// Ising product; order 2 multiplies in W_ij / (W_i W_j) for every pair.
CoherenceCurve gcce_signal(const BathConfiguration &config, const BathState &state, int order,
                           const std::vector<double> &tau, const GcceOptions &options = {});

/// Exact propagation of the whole bath for one pure state (at most 12 spins).
CoherenceCurve exact_signal(const BathConfiguration &config, const BathState &state,
                            const std::vector<double> &tau, const GcceOptions &options = {});

inline constexpr std::size_t kExactStateLimit = 6;

struct BathParams {
    double density = 0.001;
    double r_cut = 40.0;
    double nv_depth = 10.0;
    int n_configurations = 100;
    int gcce_order = 2;
    std::optional<Vec3> fixed_spin;
    std::uint64_t seed = 0;
    bool flipflop = true;
};

/// Configuration-averaged coherence. Orders 0 and 1 average exactly over bath
/// states. Order 2 averages exactly over bath states for configurations of at
/// most kExactStateLimit spins and draws one state otherwise. Configuration i
/// uses stream_rng(seed, i), so the result does not depend on `threads`.
CoherenceCurve ensemble_signal(const BathParams &params, const std::vector<double> &tau, int threads = 1);

/// The configurations ensemble_signal would draw.
std::vector<BathConfiguration> sample_ensemble(const BathParams &params);

}  // namespace qemsense

#endif
