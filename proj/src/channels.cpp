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

#include "qemsense/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qemsense {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};

double require_finite(double v, const char *what) {
    if (!std::isfinite(v)) {
        throw Error(ErrorCode::InvalidRates, std::string(what) + " is not finite");
    }
    return v;
}

double table_value(const std::vector<std::pair<double, double>> &pts, double t) {
    if (t <= pts.front().first) return pts.front().second;
    if (t >= pts.back().first) return pts.back().second;
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](double x, const auto &p) { return x < p.first; });
    const auto &[t1, v1] = *it;
    const auto &[t0, v0] = *(it - 1);
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
}

// exact for a piecewise-linear integrand: trapezoids between breakpoints
double table_integral(const std::vector<std::pair<double, double>> &pts, double t) {
    double lo = std::min(0.0, t);
    double hi = std::max(0.0, t);
    std::vector<double> knots{lo};
    for (const auto &p : pts) {
        if (p.first > lo && p.first < hi) knots.push_back(p.first);
    }
    knots.push_back(hi);
    double sum = 0.0;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        double a = knots[i - 1];
        double b = knots[i];
        sum += 0.5 * (b - a) * (table_value(pts, a) + table_value(pts, b));
    }
    return t >= 0.0 ? sum : -sum;
}

double simpson_step(const std::function<double(double)> &f, double a, double fa, double b, double fb,
                    double m, double fm, double whole, double tol, int depth) {
    double lm = 0.5 * (a + m);
    double rm = 0.5 * (m + b);
    double flm = require_finite(f(lm), "rate function value");
    double frm = require_finite(f(rm), "rate function value");
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return left + right + delta / 15.0;
    }
    return simpson_step(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1) +
           simpson_step(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1);
}

Mat4 diagonal_stm(Complex coherence) {
    Mat4 s = Mat4::Zero();
    s(0, 0) = 1.0;
    s(3, 3) = 1.0;
    s(1, 1) = coherence;
    s(2, 2) = std::conj(coherence);
    return s;
}

ExtremalRealization rz(double angle) {
    return ExtremalRealization::from_unitary(Rotation::about(PauliAxis::Z, angle).unitary());
}

std::vector<ExtremalRealization> rz_pair(double phi, double theta) {
    if (std::abs(theta) < 1e-12) {
        return {rz(phi)};
    }
    return {rz(phi + theta), rz(phi - theta)};
}

MitigationPlan dephasing_plan(double big_gamma, double phi) {
    RealMat4 target = invert_channel(dephasing_channel(big_gamma, phi)).ptm();
    double p = std::expm1(big_gamma) / 2.0;
    Mat2 minus = pauli()[3] * Rotation::about(PauliAxis::Z, phi).unitary();
    return assemble_plan(p, {rz(phi)}, {ExtremalRealization::from_unitary(minus)}, target);
}

}  // namespace

// ---------------------------------------------------------------------------
// Rates

RateFunction RateFunction::constant(double value) {
    require_finite(value, "constant rate");
    return RateFunction(Constant{value});
}

RateFunction RateFunction::sinusoidal(double amplitude, double frequency, double offset) {
    require_finite(amplitude, "sinusoid amplitude");
    require_finite(frequency, "sinusoid frequency");
    require_finite(offset, "sinusoid offset");
    return RateFunction(Sinusoidal{amplitude, frequency, offset});
}

RateFunction RateFunction::table(std::vector<std::pair<double, double>> points) {
    if (points.empty()) {
        throw Error(ErrorCode::InvalidRates, "rate table is empty");
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        require_finite(points[i].first, "rate table time");
        require_finite(points[i].second, "rate table value");
        if (i > 0 && !(points[i].first > points[i - 1].first)) {
            throw Error(ErrorCode::InvalidRates, "rate table times must be strictly increasing");
        }
    }
    return RateFunction(Table{std::move(points)});
}

RateFunction RateFunction::custom(std::function<double(double)> f) {
    if (!f) {
        throw Error(ErrorCode::InvalidRates, "custom rate function is empty");
    }
    return RateFunction(Custom{std::move(f)});
}

double RateFunction::operator()(double t) const {
    return std::visit(
        Overloaded{[](const Constant &c) { return c.value; },
                   [t](const Sinusoidal &s) { return s.amplitude * std::sin(s.frequency * t) + s.offset; },
                   [t](const Table &tab) { return table_value(tab.points, t); },
                   [t](const Custom &c) { return c.f(t); }},
        payload_);
}

double RateFunction::integral(double t) const {
    double v = std::visit(
        Overloaded{[t](const Constant &c) { return c.value * t; },
                   [t](const Sinusoidal &s) {
                       double osc = s.frequency == 0.0
                                        ? 0.0
                                        : s.amplitude * (1.0 - std::cos(s.frequency * t)) / s.frequency;
                       return osc + s.offset * t;
                   },
                   [t](const Table &tab) { return table_integral(tab.points, t); },
                   [t](const Custom &c) { return adaptive_simpson(c.f, 0.0, t); }},
        payload_);
    return require_finite(v, "integrated rate");
}

double adaptive_simpson(const std::function<double(double)> &f, double a, double b, double abs_tol,
                        int max_depth) {
    if (a == b) {
        return 0.0;
    }
    double fa = require_finite(f(a), "rate function value");
    double fb = require_finite(f(b), "rate function value");
    double m = 0.5 * (a + b);
    double fm = require_finite(f(m), "rate function value");
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_step(f, a, fa, b, fb, m, fm, whole, abs_tol, max_depth);
}

AccumulatedRates integrate_rates(const RateFunctions &rates, double t) {
    if (!std::isfinite(t) || t < 0.0) {
        throw Error(ErrorCode::InvalidInput, "evaluation time must be finite and non-negative");
    }
    AccumulatedRates out{rates.gamma.integral(t), rates.omega_noise.integral(t)};
    if (out.big_gamma < -1e-12) {
        throw Error(ErrorCode::Unphysical, "accumulated decay is negative (" + std::to_string(out.big_gamma) + ")");
    }
    out.big_gamma = std::max(out.big_gamma, 0.0);
    return out;
}

// ---------------------------------------------------------------------------
// Channels

ChannelRep dephasing_channel(double big_gamma, double phi) {
    require_finite(big_gamma, "Gamma");
    require_finite(phi, "phi");
    if (big_gamma < 0.0) {
        throw Error(ErrorCode::Unphysical, "dephasing with negative Gamma");
    }
    return ChannelRep::from_stm(diagonal_stm(std::polar(std::exp(-big_gamma), phi)));
}

ChannelRep relaxation_channel(double big_gamma, double phi) {
    require_finite(big_gamma, "Gamma");
    require_finite(phi, "phi");
    if (big_gamma < 0.0) {
        throw Error(ErrorCode::Unphysical, "relaxation with negative Gamma");
    }
    Mat4 s = diagonal_stm(std::polar(std::exp(-big_gamma / 2.0), phi));
    s(0, 3) = -std::expm1(-big_gamma);
    s(3, 3) = std::exp(-big_gamma);
    return ChannelRep::from_stm(s);
}

void ThermalParams::validate() const {
    if (!std::isfinite(gamma0) || gamma0 < 0.0) {
        throw Error(ErrorCode::InvalidInput, "thermal gamma0 must be finite and non-negative");
    }
    if (!std::isfinite(n_thermal) || n_thermal < 0.0) {
        throw Error(ErrorCode::InvalidInput, "thermal occupation must be finite and non-negative");
    }
}

ChannelRep thermalization_channel(const ThermalParams &params, double t, double phi) {
    params.validate();
    require_finite(phi, "phi");
    if (!std::isfinite(t) || t < 0.0) {
        throw Error(ErrorCode::InvalidInput, "evaluation time must be finite and non-negative");
    }
    const double g1 = params.gamma1();
    const double g2 = params.gamma2();
    const double g = params.total_rate();
    Mat4 s = diagonal_stm(std::polar(std::exp(-g * t / 2.0), phi));
    if (g > 0.0) {
        const double decayed = -std::expm1(-g * t);  // 1 - e^{-Gamma t}
        s(0, 0) = 1.0 - g2 * decayed / g;
        s(0, 3) = g1 * decayed / g;
        s(3, 0) = g2 * decayed / g;
        s(3, 3) = 1.0 - g1 * decayed / g;
    }
    return ChannelRep::from_stm(s);
}

ChannelRep coherence_channel(Complex w) {
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) {
        throw Error(ErrorCode::InvalidInput, "coherence factor is not finite");
    }
    if (std::abs(w) > 1.0 + 1e-12) {
        throw Error(ErrorCode::Unphysical, "coherence factor exceeds one in magnitude");
    }
    return ChannelRep::from_stm(diagonal_stm(w));
}

ChannelRep noise_channel(const NoiseChannelSpec &spec, double t) {
    switch (spec.kind) {
        case NoiseKind::Dephasing: {
            auto acc = integrate_rates(spec.rates, t);
            return dephasing_channel(acc.big_gamma, acc.phi);
        }
        case NoiseKind::Relaxation: {
            auto acc = integrate_rates(spec.rates, t);
            return relaxation_channel(acc.big_gamma, acc.phi);
        }
        case NoiseKind::Thermalization: {
            if (!spec.thermal) {
                throw Error(ErrorCode::InvalidInput, "thermalization noise needs thermal parameters");
            }
            auto acc = integrate_rates(spec.rates, t);
            return thermalization_channel(*spec.thermal, t, acc.phi);
        }
        case NoiseKind::CustomPtm: {
            auto c = ChannelRep::from_ptm(spec.custom_ptm);
            if (!check_cptp(c, 1e-9).cptp()) {
                throw Error(ErrorCode::InvalidInput, "custom noise PTM is not CPTP");
            }
            return c;
        }
    }
    throw Error(ErrorCode::InvalidInput, "unknown noise kind");
}

// ---------------------------------------------------------------------------
// Closed-form plans

MitigationPlan analytic_plan(const NoiseChannelSpec &spec, double t) {
    switch (spec.kind) {
        case NoiseKind::Dephasing: {
            auto acc = integrate_rates(spec.rates, t);
            return dephasing_plan(acc.big_gamma, acc.phi);
        }
        case NoiseKind::Relaxation: {
            auto acc = integrate_rates(spec.rates, t);
            RealMat4 target = invert_channel(relaxation_channel(acc.big_gamma, acc.phi)).ptm();
            double theta = std::acos(std::exp(-acc.big_gamma / 2.0));
            double p = std::expm1(acc.big_gamma);
            return assemble_plan(p, rz_pair(acc.phi, theta),
                                 {ExtremalRealization::from_angles(kPi / 2, kPi / 2)}, target);
        }
        case NoiseKind::Thermalization: {
            if (!spec.thermal) {
                throw Error(ErrorCode::InvalidInput, "thermalization noise needs thermal parameters");
            }
            const auto &tp = *spec.thermal;
            auto acc = integrate_rates(spec.rates, t);
            RealMat4 target = invert_channel(thermalization_channel(tp, t, acc.phi)).ptm();
            const double g1 = tp.gamma1();
            const double g2 = tp.gamma2();
            const double g = tp.total_rate();
            if (g == 0.0) {
                return assemble_plan(0.0, {rz(acc.phi)}, {}, target);
            }
            const double x = g * t;
            const double p = g1 * std::expm1(x) / g;
            const double theta =
                std::acos(std::clamp(g * std::exp(x / 2.0) / (g2 + g1 * std::exp(x)), -1.0, 1.0));
            const double alpha = std::acos(std::sqrt(g2 / g1));
            const double beta = kPi - alpha;
            std::vector<ExtremalRealization> minus{ExtremalRealization::from_angles(alpha, beta)};
            if (std::abs(beta - alpha) > 1e-12) {
                minus.push_back(ExtremalRealization::from_angles(beta, alpha));
            }
            return assemble_plan(p, rz_pair(acc.phi, theta), minus, target);
        }
        case NoiseKind::CustomPtm:
            throw Error(ErrorCode::UseNumericalPipeline, "custom PTM noise has no closed-form plan");
    }
    throw Error(ErrorCode::InvalidInput, "unknown noise kind");
}

MitigationPlan analytic_coherence_plan(Complex w) {
    if (std::abs(w) == 0.0) {
        throw Error(ErrorCode::NotInvertible, "coherence factor is zero");
    }
    if (std::abs(w) > 1.0 + 1e-12) {
        throw Error(ErrorCode::Unphysical, "coherence factor exceeds one in magnitude");
    }
    return dephasing_plan(std::max(0.0, -std::log(std::abs(w))), std::arg(w));
}

Rotation measurement_frame() { return Rotation::about(PauliAxis::Y, kPi / 2); }

ChannelRep frame_conjugate(const ChannelRep &c, const Rotation &rotation) {
    RealMat4 e = RealMat4::Identity();
    e.block<3, 3>(1, 1) = rotation.so3();
    return ChannelRep::from_ptm(e * c.ptm() * e.transpose());
}

}  // namespace qemsense
