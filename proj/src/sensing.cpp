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


#include "qemsense/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "qemsense/parallel.hpp"

namespace qemsense {

namespace {

constexpr double kPi = std::numbers::pi;

// integral of |cos x| over [0, u]
double rectified_cos_integral(double u) {
    double n = std::floor(u / kPi);
    double v = u - n * kPi;
    double partial = v <= kPi / 2 ? std::sin(v) : 2.0 - std::sin(v);
    return 2.0 * n + partial;
}

void check_time(double tau) {
    if (!std::isfinite(tau) || tau < 0.0) {
        throw Error(ErrorCode::InvalidInput, "sensing time must be finite and non-negative");
    }
}

void check_ac(const SensingSpec &spec, double tau) {
    if (!(spec.omega_s > 0.0) || !std::isfinite(spec.omega_s)) {
        throw Error(ErrorCode::InvalidInput, "AC sensing needs a positive omega_s");
    }
    if (spec.measure_full_half_periods) {
        double k = tau * spec.omega_s / kPi;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k)) {
            throw Error(ErrorCode::GridViolation,
                        "tau = " + std::to_string(tau) + " us is not a whole number of half periods");
        }
    }
}

std::vector<std::int64_t> allocate(const std::vector<double> &fractions, const std::vector<bool> &plus,
                                   std::int64_t n) {
    const auto m = static_cast<std::int64_t>(fractions.size());
    if (n < m) {
        throw Error(ErrorCode::TooFewShots,
                    std::to_string(n) + " shots cannot cover " + std::to_string(m) + " circuits");
    }
    std::size_t first_plus = 0;
    while (first_plus < plus.size() && !plus[first_plus]) ++first_plus;
    if (first_plus == plus.size()) first_plus = 0;

    std::vector<std::int64_t> shots;
    std::int64_t assigned = 0;
    for (double f : fractions) {
        auto k = std::max<std::int64_t>(1, std::llround(f * static_cast<double>(n)));
        shots.push_back(k);
        assigned += k;
    }
    shots[first_plus] += n - assigned;
    // the first plus circuit pays for the one-shot minimum of the others
    if (shots[first_plus] < 1) {
        std::int64_t deficit = 1 - shots[first_plus];
        shots[first_plus] = 1;
        for (std::size_t j = 0; j < shots.size() && deficit > 0; ++j) {
            std::int64_t take = std::min(deficit, shots[j] - 1);
            if (j == first_plus || take <= 0) continue;
            shots[j] -= take;
            deficit -= take;
        }
    }
    return shots;
}

double z_expectation(const std::vector<Mat2> &kraus, const Mat2 &rho) {
    Mat2 out = Mat2::Zero();
    for (const auto &k : kraus) out += k * rho * k.adjoint();
    return (out * pauli()[3]).trace().real();
}

}  // namespace

double accumulate_phase(const SensingSpec &spec, double tau) {
    return spec.field_nt * phase_field_derivative(spec, tau);
}

double phase_field_derivative(const SensingSpec &spec, double tau) {
    check_time(tau);
    // nT -> T and us -> s
    const double scale = spec.gamma_e * 1e-9 * 1e-6;
    if (spec.mode == SensingMode::DC) {
        return scale * tau;
    }
    check_ac(spec, tau);
    return scale * rectified_cos_integral(spec.omega_s * tau) / spec.omega_s;
}

std::vector<double> pi_pulse_times(const SensingSpec &spec, double tau) {
    check_time(tau);
    std::vector<double> out;
    if (spec.mode == SensingMode::DC) return out;
    check_ac(spec, tau);
    const double half = kPi / spec.omega_s;
    for (int n = 1;; ++n) {
        double t = half * (n - 0.5);
        if (t >= tau) break;
        out.push_back(t);
    }
    return out;
}

IdealSignal ideal_signal(double theta) { return {std::sin(theta), std::abs(theta) < 0.1}; }

DensityMatrix ideal_state(double theta) {
    return DensityMatrix::from_bloch(Vec3(std::cos(theta), 0.0, std::sin(theta)));
}

DensityMatrix noisy_state(double theta, const ChannelRep &noise) { return apply(noise, ideal_state(theta)); }

std::vector<std::int64_t> allocate_shots(const MitigationPlan &plan, std::int64_t n) {
    std::vector<double> fractions;
    std::vector<bool> plus;
    for (const auto &c : plan.circuits) {
        fractions.push_back(c.shot_fraction);
        plus.push_back(c.sign == CircuitSign::Plus);
    }
    return allocate(fractions, plus, n);
}

std::vector<std::int64_t> allocate_shots(double p, std::int64_t n) {
    if (!(p >= 0.0) || !std::isfinite(p)) {
        throw Error(ErrorCode::InvalidInput, "overhead must be finite and non-negative");
    }
    double total = 2.0 * p + 1.0;
    double fp = (1.0 + p) / (2.0 * total);
    double fm = p / (2.0 * total);
    return allocate({fp, fp, fm, fm}, {true, true, false, false}, n);
}

double combine_signals(const MitigationPlan &plan, const std::vector<double> &s) {
    if (s.size() != plan.circuits.size()) {
        throw Error(ErrorCode::InvalidInput, "one signal per circuit is required");
    }
    double out = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) out += plan.circuits[j].signed_weight() * s[j];
    return out;
}

double mitigated_std(const MitigationPlan &plan, const std::vector<double> &s, std::int64_t n) {
    if (s.size() != plan.circuits.size()) {
        throw Error(ErrorCode::InvalidInput, "one signal per circuit is required");
    }
    if (n < 1) {
        throw Error(ErrorCode::TooFewShots, "shot count must be positive");
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < s.size(); ++j) {
        sum += plan.circuits[j].weight * (1.0 - s[j] * s[j]);
    }
    return std::sqrt(std::max(0.0, (2.0 * plan.p + 1.0) / static_cast<double>(n) * sum));
}

std::vector<double> exact_circuit_signals(const MitigationPlan &plan, const DensityMatrix &rho) {
    std::vector<double> out;
    for (const auto &c : plan.circuits) {
        out.push_back(z_expectation(c.realization.channel_kraus(), rho.matrix()));
    }
    return out;
}

MitigatedEstimate mitigated_estimate(const MitigationPlan &plan, const DensityMatrix &rho_noisy, std::int64_t n,
                                     std::uint64_t seed, std::uint64_t stream) {
    MitigatedEstimate est;
    est.p = plan.p;
    est.shots_used = allocate_shots(plan, n);
    auto exact = exact_circuit_signals(plan, rho_noisy);
    for (std::size_t j = 0; j < plan.circuits.size(); ++j) {
        double q = std::clamp((1.0 + exact[j]) / 2.0, 0.0, 1.0);
        auto rng = stream_rng(seed, stream, j);
        std::binomial_distribution<std::int64_t> draw(est.shots_used[j], q);
        double k = static_cast<double>(draw(rng));
        est.s_values.push_back(2.0 * k / static_cast<double>(est.shots_used[j]) - 1.0);
    }
    est.s_mitigated = combine_signals(plan, est.s_values);
    est.std = mitigated_std(plan, est.s_values, n);
    return est;
}

SensitivityReport sensitivity(double delta_s, double s_noisy, double noise_zz, const SensingSpec &spec,
                              double tau, double p, std::int64_t n) {
    const double db = phase_field_derivative(spec, tau);
    if (db == 0.0) {
        throw Error(ErrorCode::DegenerateProtocol, "the phase does not depend on the field at this time");
    }
    const double tau_s = tau * 1e-6;
    SensitivityReport r;
    r.partial_b_theta = db;
    r.eta_mitigated = std::sqrt(static_cast<double>(n) * tau_s) * delta_s / std::abs(db);
    r.eta_bound = std::sqrt(tau_s) * (2.0 * p + 1.0) / std::abs(db);
    r.eta_naqs = noise_zz == 0.0 ? std::numeric_limits<double>::infinity()
                                 : std::sqrt(tau_s) * std::sqrt(std::max(0.0, 1.0 - s_noisy * s_noisy)) /
                                       std::abs(db * noise_zz);
    r.nonlinear = std::abs(accumulate_phase(spec, tau)) > 0.3;
    return r;
}

// ---------------------------------------------------------------------------
// Sweep

ChannelRep source_channel(const NoiseSource &source, const std::vector<double> &grid, std::size_t index) {
    if (const auto *spec = std::get_if<NoiseChannelSpec>(&source)) {
        return noise_channel(*spec, grid.at(index));
    }
    const auto &curve = std::get<CoherenceCurve>(source);
    if (curve.times.size() != grid.size() || std::abs(curve.times.at(index) - grid.at(index)) > 1e-9) {
        throw Error(ErrorCode::InvalidInput, "bath coherence curve does not match the sensing grid");
    }
    return coherence_channel(curve.values[index]);
}

MitigationPlan sweep_plan(const NoiseSource &source, const std::vector<double> &grid, std::size_t index,
                          const SweepOptions &options) {
    const double tau = grid.at(index);
    ChannelRep measured_noise = frame_conjugate(source_channel(source, grid, index), measurement_frame());
    switch (options.strategy) {
        case Strategy::Inverse: return build_plan(invert_channel(measured_noise));
        case Strategy::Optimized: return optimize_mitigation_map(measured_noise, options.optimize).plan;
        case Strategy::Analytic: {
            MitigationPlan plan;
            if (const auto *spec = std::get_if<NoiseChannelSpec>(&source)) {
                plan = analytic_plan(*spec, tau);
            } else {
                // the coherence factor is the precession-frame STM (1,1) element
                plan = analytic_coherence_plan(source_channel(source, grid, index).stm()(1, 1));
            }
            return conjugate_plan(plan, measurement_frame());
        }
        case Strategy::None: break;
    }
    throw Error(ErrorCode::InvalidInput, "no plan for strategy none");
}

namespace {

SweepRow sweep_row(const SensingSpec &spec, const NoiseSource &source, const SweepOptions &options, std::size_t i) {
    SweepRow row;
    row.tau = spec.tau[i];
    row.theta = accumulate_phase(spec, row.tau);
    row.s_ideal = std::sin(row.theta);
    row.nonlinear = std::abs(row.theta) > 0.3;

    ChannelRep noise = frame_conjugate(source_channel(source, spec.tau, i), measurement_frame());
    DensityMatrix rho = noisy_state(row.theta, noise);
    row.s_noisy = rho.expectation(PauliAxis::Z);
    const double noise_zz = noise.ptm()(3, 3);
    const double db = phase_field_derivative(spec, row.tau);
    const std::int64_t n = options.shots;
    const double tau_s = row.tau * 1e-6;
    auto eta = [&](double delta_s) { return std::sqrt(static_cast<double>(n) * tau_s) * delta_s / std::abs(db); };

    if (db != 0.0) {
        row.eta_naqs = sensitivity(0.0, row.s_noisy, noise_zz, spec, row.tau, 0.0, n).eta_naqs;
    }

    if (options.strategy == Strategy::None) {
        if (n < 1) throw Error(ErrorCode::TooFewShots, "shot count must be positive");
        double sd = std::sqrt(std::max(0.0, 1.0 - row.s_noisy * row.s_noisy) / static_cast<double>(n));
        row.p = 0.0;
        row.s_mitigated = row.s_noisy;
        row.s_mitigated_exact = row.s_noisy;
        row.s_mitigated_std = sd;
        row.std_exact = sd;
        row.circuits_used = 1;
        row.shots = {n};
        if (db != 0.0) {
            row.eta_mitigated = eta(sd);
            row.eta_mitigated_exact = eta(sd);
            row.eta_bound = std::sqrt(tau_s) / std::abs(db);
        }
        return row;
    }

    MitigationPlan plan;
    try {
        plan = sweep_plan(source, spec.tau, i, options);
    } catch (const Error &e) {
        if (e.code() != ErrorCode::NotInvertible) throw;
        row.invertible = false;
        row.p = std::numeric_limits<double>::infinity();
        return row;
    }
    row.p = plan.p;
    row.circuits_used = plan.circuits.size();

    auto est = mitigated_estimate(plan, rho, n, options.seed, i);
    row.s_mitigated = est.s_mitigated;
    row.s_mitigated_std = est.std;
    row.shots = est.shots_used;

    auto exact = exact_circuit_signals(plan, rho);
    row.s_mitigated_exact = combine_signals(plan, exact);
    row.std_exact = mitigated_std(plan, exact, n);

    if (db != 0.0) {
        row.eta_mitigated = eta(est.std);
        row.eta_mitigated_exact = eta(*row.std_exact);
        row.eta_bound = std::sqrt(tau_s) * (2.0 * plan.p + 1.0) / std::abs(db);
    }
    return row;
}

}  // namespace

std::vector<SweepRow> sweep(const SensingSpec &spec, const NoiseSource &source, const SweepOptions &options) {
    if (spec.tau.empty()) {
        throw Error(ErrorCode::InvalidInput, "sensing time grid is empty");
    }
    std::vector<SweepRow> rows(spec.tau.size());
    parallel_for(rows.size(), options.threads,
                 [&](std::size_t i) { rows[i] = sweep_row(spec, source, options, i); });
    return rows;
}

}  // namespace qemsense
