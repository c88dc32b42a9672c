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


#include "qemsense/spinbath.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "qemsense/parallel.hpp"

namespace qemsense {

namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char *what) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + " must be positive");
    }
}

void require_grid(const std::vector<double> &tau) {
    for (double t : tau) {
        if (!std::isfinite(t) || t < 0.0) {
            throw Error(ErrorCode::InvalidInput, "time grid entries must be finite and non-negative");
        }
    }
}

// Exact evolution of a cluster of m spins for one computational state.
// a: NV couplings (MHz); ff: flip-flop couplings (MHz); bit k of `state` set
// means spin k is down.
std::vector<Complex> propagate_cluster(const std::vector<double> &a, const Eigen::MatrixXd &ff, unsigned state,
                                       const std::vector<double> &tau) {
    const int m = static_cast<int>(a.size());
    const int dim = 1 << m;
    auto hamiltonian = [&](double branch) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (int b = 0; b < dim; ++b) {
            double diag = 0.0;
            for (int k = 0; k < m; ++k) {
                double z = (b >> k) & 1 ? -1.0 : 1.0;
                diag += branch * 2.0 * kPi * a[k] / 4.0 * z;
            }
            h(b, b) = diag;
            for (int k = 0; k < m; ++k) {
                for (int l = k + 1; l < m; ++l) {
                    if (((b >> k) & 1) != ((b >> l) & 1)) {
                        h(b ^ (1 << k) ^ (1 << l), b) = 2.0 * kPi * ff(k, l) / 2.0;
                    }
                }
            }
        }
        return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h);
    };
    auto up = hamiltonian(1.0);
    auto down = hamiltonian(-1.0);
    Eigen::VectorXd overlap_up = up.eigenvectors().row(state).transpose();
    Eigen::VectorXd overlap_down = down.eigenvectors().row(state).transpose();

    std::vector<Complex> out;
    out.reserve(tau.size());
    for (double t : tau) {
        Eigen::VectorXcd cu = Eigen::VectorXcd::Zero(dim);
        Eigen::VectorXcd cd = Eigen::VectorXcd::Zero(dim);
        for (int j = 0; j < dim; ++j) {
            cu += std::polar(overlap_up(j), -up.eigenvalues()(j) * t) * up.eigenvectors().col(j);
            cd += std::polar(overlap_down(j), -down.eigenvalues()(j) * t) * down.eigenvectors().col(j);
        }
        out.push_back(cd.dot(cu));
    }
    return out;
}

unsigned state_bits(const BathState &state, const std::vector<std::size_t> &members) {
    unsigned bits = 0;
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (state[members[k]] < 0) bits |= 1u << k;
    }
    return bits;
}

void check_state(const BathState &state, std::size_t n) {
    if (state.size() != n) {
        throw Error(ErrorCode::InvalidInput, "bath state size does not match the configuration");
    }
    for (int z : state) {
        if (z != 1 && z != -1) {
            throw Error(ErrorCode::InvalidInput, "bath state entries must be +1 or -1");
        }
    }
}

std::vector<Complex> ising_product(const std::vector<double> &a, const BathState &state,
                                   const std::vector<double> &tau) {
    double freq = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) freq += kPi * a[k] * state[k];
    std::vector<Complex> out;
    for (double t : tau) out.push_back(std::polar(1.0, -freq * t));
    return out;
}

std::vector<Complex> state_averaged_ising(const std::vector<double> &a, const std::vector<double> &tau) {
    std::vector<Complex> out;
    for (double t : tau) {
        double prod = 1.0;
        for (double ak : a) prod *= std::cos(kPi * ak * t);
        out.emplace_back(prod, 0.0);
    }
    return out;
}

}  // namespace

double dipolar_prefactor() {
    using namespace constants;
    // Hz m^3 -> MHz nm^3
    return hbar * mu0 * gamma_e * gamma_e / (8.0 * kPi * kPi) * 1e27 / 1e6;
}

double larmor_shift(double field_nt, double gamma_e) { return gamma_e * field_nt * 1e-9 * 1e-6; }

std::vector<Vec3> BathConfiguration::all_spins() const {
    std::vector<Vec3> out;
    if (fixed_spin) out.push_back(*fixed_spin);
    out.insert(out.end(), positions.begin(), positions.end());
    return out;
}

BathConfiguration sample_configuration(double density, double r_cut, double nv_depth, std::mt19937_64 &rng,
                                       std::optional<Vec3> fixed_spin) {
    if (!std::isfinite(density) || density < 0.0) {
        throw Error(ErrorCode::InvalidInput, "spin density must be finite and non-negative");
    }
    require_positive(r_cut, "cutoff radius");
    require_positive(nv_depth, "NV depth");
    const double lambda = kPi * r_cut * r_cut * density;
    if (lambda > 1e6) {
        throw Error(ErrorCode::TooManySpins, "mean spin count " + std::to_string(lambda) + " exceeds 1e6");
    }
    BathConfiguration config;
    config.nv_depth = nv_depth;
    config.density = density;
    config.r_cut = r_cut;
    config.fixed_spin = fixed_spin;
    long count = 0;
    if (lambda > 0.0) {
        count = std::poisson_distribution<long>(lambda)(rng);
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (long i = 0; i < count; ++i) {
        double r = r_cut * std::sqrt(unit(rng));
        double phi = 2.0 * kPi * unit(rng);
        config.positions.emplace_back(r * std::cos(phi), r * std::sin(phi), nv_depth);
    }
    return config;
}

BathConfiguration restrict_radius(const BathConfiguration &config, double r_cut) {
    BathConfiguration out = config;
    out.r_cut = r_cut;
    out.positions.clear();
    for (const auto &p : config.positions) {
        if (p.head<2>().norm() <= r_cut) out.positions.push_back(p);
    }
    return out;
}

DipolarCoupling dipolar_coupling(const Vec3 &separation) {
    const double r = separation.norm();
    if (!(r > 1e-12)) {
        throw Error(ErrorCode::Singular, "dipolar coupling at zero separation");
    }
    const double nz = separation.z() / r;
    const double k = dipolar_prefactor() * 1e3 / (r * r * r);
    return {k * (3.0 * nz * nz - 1.0), k * (1.0 - 3.0 * nz * nz)};
}

double phase_time(double nv_depth, double r_lateral) {
    double a_mhz = dipolar_coupling(Vec3(r_lateral, 0.0, nv_depth)).a_zz / 1e3;
    return a_mhz == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / std::abs(a_mhz);
}

double flipflop_radius(double tau_us) {
    require_positive(tau_us, "time");
    return std::cbrt(dipolar_prefactor() * tau_us);
}

std::vector<double> nv_couplings_mhz(const BathConfiguration &config) {
    std::vector<double> a;
    for (const auto &p : config.all_spins()) a.push_back(dipolar_coupling(p).a_zz / 1e3);
    return a;
}

// ---------------------------------------------------------------------------
// Mean field

double FrequencyHistogram::mean() const {
    if (shifts.empty()) return 0.0;
    return std::accumulate(shifts.begin(), shifts.end(), 0.0) / static_cast<double>(shifts.size());
}

double FrequencyHistogram::stddev() const {
    if (shifts.size() < 2) return 0.0;
    double m = mean();
    double ss = 0.0;
    for (double s : shifts) ss += (s - m) * (s - m);
    return std::sqrt(ss / static_cast<double>(shifts.size() - 1));
}

std::vector<std::size_t> FrequencyHistogram::counts(std::size_t bins) const {
    std::vector<std::size_t> out(bins, 0);
    if (shifts.empty() || bins == 0) return out;
    auto [lo, hi] = std::minmax_element(shifts.begin(), shifts.end());
    double width = (*hi - *lo) / static_cast<double>(bins);
    for (double s : shifts) {
        std::size_t b = width > 0.0 ? static_cast<std::size_t>((s - *lo) / width) : 0;
        out[std::min(b, bins - 1)]++;
    }
    return out;
}

MeanFieldResult mf_signal(const std::vector<BathConfiguration> &configs, double field_nt,
                          const std::vector<double> &tau, std::uint64_t seed, int states_per_configuration,
                          int threads) {
    if (configs.empty()) {
        throw Error(ErrorCode::InvalidInput, "mean-field signal needs at least one configuration");
    }
    require_grid(tau);
    std::vector<std::vector<Complex>> curves(configs.size());
    std::vector<std::vector<double>> shifts(configs.size());
    parallel_for(configs.size(), threads, [&](std::size_t i) {
        auto a = nv_couplings_mhz(configs[i]);
        curves[i] = state_averaged_ising(a, tau);
        auto rng = stream_rng(seed, i);
        for (int s = 0; s < states_per_configuration; ++s) {
            auto state = sample_bath_state(a.size(), rng);
            double shift = 0.0;
            for (std::size_t k = 0; k < a.size(); ++k) shift += kPi * a[k] * state[k];
            shifts[i].push_back(shift);
        }
    });

    MeanFieldResult out;
    out.curve.times = tau;
    out.curve.order = 0;
    const double omega = larmor_shift(field_nt);
    for (std::size_t j = 0; j < tau.size(); ++j) {
        Complex sum = 0.0;
        for (const auto &c : curves) sum += c[j];
        out.curve.values.push_back(sum / static_cast<double>(configs.size()) * std::polar(1.0, omega * tau[j]));
    }
    for (const auto &s : shifts) out.histogram.shifts.insert(out.histogram.shifts.end(), s.begin(), s.end());
    return out;
}

double estimate_t2star(const FrequencyHistogram &histogram) {
    if (histogram.shifts.size() < 30) {
        throw Error(ErrorCode::InvalidInput, "T2* estimate needs at least 30 frequency samples");
    }
    double sigma = histogram.stddev();
    if (!(sigma > 0.0)) {
        throw Error(ErrorCode::InfiniteT2, "frequency shifts have zero spread");
    }
    return std::sqrt(2.0) / sigma;
}

double fit_gaussian_t2(const CoherenceCurve &curve, double floor) {
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t j = 0; j < curve.times.size(); ++j) {
        double t = curve.times[j];
        double w = std::abs(curve.values[j]);
        if (t <= 0.0 || w < floor || w >= 1.0) continue;
        double x = t * t;
        sxy += x * std::log(w);
        sxx += x * x;
    }
    if (sxx == 0.0 || sxy >= 0.0) {
        throw Error(ErrorCode::InvalidInput, "no decaying points to fit");
    }
    return std::sqrt(-sxx / sxy);
}

// ---------------------------------------------------------------------------
// Cluster expansion

BathState sample_bath_state(std::size_t n, std::mt19937_64 &rng) {
    std::bernoulli_distribution coin(0.5);
    BathState state(n);
    for (auto &z : state) z = coin(rng) ? 1 : -1;
    return state;
}

CoherenceCurve gcce_signal(const BathConfiguration &config, const BathState &state, int order,
                           const std::vector<double> &tau, const GcceOptions &options) {
    if (order < 0 || order > 2) {
        throw Error(ErrorCode::InvalidInput, "cluster order must be 0, 1 or 2");
    }
    require_grid(tau);
    auto spins = config.all_spins();
    check_state(state, spins.size());
    auto a = nv_couplings_mhz(config);

    CoherenceCurve curve;
    curve.times = tau;
    curve.order = order;
    curve.values = ising_product(a, state, tau);
    if (order < 2 || !options.flipflop) {
        return curve;
    }
    for (std::size_t i = 0; i < spins.size(); ++i) {
        for (std::size_t j = i + 1; j < spins.size(); ++j) {
            Eigen::MatrixXd ff = Eigen::MatrixXd::Zero(2, 2);
            ff(0, 1) = ff(1, 0) = dipolar_coupling(spins[i] - spins[j]).a_flipflop / 1e3;
            std::vector<std::size_t> members{i, j};
            auto pair = propagate_cluster({a[i], a[j]}, ff, state_bits(state, members), tau);
            BathState sub{state[i], state[j]};
            auto singles = ising_product({a[i], a[j]}, sub, tau);
            for (std::size_t t = 0; t < tau.size(); ++t) {
                curve.values[t] *= pair[t] / singles[t];
            }
        }
    }
    return curve;
}

CoherenceCurve exact_signal(const BathConfiguration &config, const BathState &state,
                            const std::vector<double> &tau, const GcceOptions &options) {
    require_grid(tau);
    auto spins = config.all_spins();
    if (spins.size() > 12) {
        throw Error(ErrorCode::TooManySpins, "exact propagation is limited to 12 bath spins");
    }
    check_state(state, spins.size());
    auto a = nv_couplings_mhz(config);
    const std::size_t n = spins.size();
    Eigen::MatrixXd ff = Eigen::MatrixXd::Zero(static_cast<long>(n), static_cast<long>(n));
    if (options.flipflop) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j)
                ff(i, j) = ff(j, i) = dipolar_coupling(spins[i] - spins[j]).a_flipflop / 1e3;
    }
    std::vector<std::size_t> members(n);
    std::iota(members.begin(), members.end(), 0);
    CoherenceCurve curve;
    curve.times = tau;
    curve.order = CoherenceCurve::kExact;
    curve.values = propagate_cluster(a, ff, state_bits(state, members), tau);
    return curve;
}

// ---------------------------------------------------------------------------
// Ensembles

namespace {

void validate_params(const BathParams &params) {
    if (params.n_configurations < 1) {
        throw Error(ErrorCode::InvalidInput, "need at least one bath configuration");
    }
    if (params.gcce_order < 0 || params.gcce_order > 2) {
        throw Error(ErrorCode::InvalidInput, "cluster order must be 0, 1 or 2");
    }
}

}  // namespace

std::vector<BathConfiguration> sample_ensemble(const BathParams &params) {
    validate_params(params);
    std::vector<BathConfiguration> out;
    for (int i = 0; i < params.n_configurations; ++i) {
        auto rng = stream_rng(params.seed, static_cast<std::uint64_t>(i));
        out.push_back(sample_configuration(params.density, params.r_cut, params.nv_depth, rng, params.fixed_spin));
    }
    return out;
}

CoherenceCurve ensemble_signal(const BathParams &params, const std::vector<double> &tau, int threads) {
    validate_params(params);
    require_grid(tau);
    const auto n = static_cast<std::size_t>(params.n_configurations);
    std::vector<std::vector<Complex>> curves(n);
    GcceOptions options{params.flipflop};
    parallel_for(n, threads, [&](std::size_t i) {
        auto rng = stream_rng(params.seed, i);
        auto config = sample_configuration(params.density, params.r_cut, params.nv_depth, rng, params.fixed_spin);
        const std::size_t m = config.all_spins().size();
        if (params.gcce_order < 2) {
            curves[i] = state_averaged_ising(nv_couplings_mhz(config), tau);
        } else if (m <= kExactStateLimit) {
            curves[i].assign(tau.size(), Complex(0.0));
            for (unsigned bits = 0; bits < (1u << m); ++bits) {
                BathState state(m);
                for (std::size_t k = 0; k < m; ++k) state[k] = (bits >> k) & 1 ? -1 : 1;
                auto c = gcce_signal(config, state, 2, tau, options);
                for (std::size_t t = 0; t < tau.size(); ++t) curves[i][t] += c.values[t];
            }
            for (auto &v : curves[i]) v /= static_cast<double>(1u << m);
        } else {
            curves[i] = gcce_signal(config, sample_bath_state(m, rng), 2, tau, options).values;
        }
    });
    CoherenceCurve out;
    out.times = tau;
    out.order = params.gcce_order;
    for (std::size_t t = 0; t < tau.size(); ++t) {
        Complex sum = 0.0;
        for (const auto &c : curves) sum += c[t];
        out.values.push_back(sum / static_cast<double>(n));
    }
    return out;
}

}  // namespace qemsense
