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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "qemsense/channels.hpp"

namespace qemsense {
namespace {

constexpr double kPi = std::numbers::pi;

ErrorCode code_of(const std::function<void()> &f) {
    try {
        f();
    } catch (const Error &e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return ErrorCode::InvalidInput;
}

TEST(Rates, ClosedFormIntegrals) {
    auto s = RateFunction::sinusoidal(0.2, 1.3, 0.5);
    for (double t : {0.0, 0.4, 2.0, 7.5}) {
        EXPECT_NEAR(s(t), 0.2 * std::sin(1.3 * t) + 0.5, 1e-15);
        EXPECT_NEAR(s.integral(t), 0.2 * (1 - std::cos(1.3 * t)) / 1.3 + 0.5 * t, 1e-14);
    }
    EXPECT_DOUBLE_EQ(RateFunction::constant(0.3).integral(2.0), 0.6);
}

TEST(Rates, TableIsPiecewiseLinearAndHeldOutside) {
    auto f = RateFunction::table({{1.0, 2.0}, {3.0, 4.0}});
    EXPECT_DOUBLE_EQ(f(0.0), 2.0);
    EXPECT_DOUBLE_EQ(f(2.0), 3.0);
    EXPECT_DOUBLE_EQ(f(5.0), 4.0);
    // 2 on [0,1], trapezoid 6 on [1,3], 4 on [3,4]
    EXPECT_NEAR(f.integral(4.0), 2.0 + 6.0 + 4.0, 1e-14);
    EXPECT_NEAR(f.integral(2.0), 2.0 + 2.5, 1e-14);
    EXPECT_EQ(code_of([] { RateFunction::table({{1.0, 0.0}, {1.0, 1.0}}); }), ErrorCode::InvalidRates);
}

TEST(Rates, QuadratureAgreesWithClosedForm) {
    auto custom = RateFunction::custom([](double t) { return 0.2 * std::sin(1.3 * t) + 0.5; });
    auto exact = RateFunction::sinusoidal(0.2, 1.3, 0.5);
    for (double t : {0.3, 1.0, 9.0, 40.0}) EXPECT_NEAR(custom.integral(t), exact.integral(t), 1e-9);
    EXPECT_NEAR(adaptive_simpson([](double x) { return std::exp(-x * x); }, 0.0, 3.0),
                std::sqrt(kPi) / 2 * std::erf(3.0), 1e-10);
}

TEST(Rates, NegativeRatesAllowedWhileAccumulatedDecayStaysNonNegative) {
    RateFunctions r;
    r.gamma = RateFunction::sinusoidal(1.0, 1.0, 0.0);  // integral 1 - cos t >= 0
    EXPECT_NO_THROW(integrate_rates(r, 4.0));
    r.gamma = RateFunction::sinusoidal(-1.0, 1.0, 0.0);
    EXPECT_EQ(code_of([&] { integrate_rates(r, 1.0); }), ErrorCode::Unphysical);
    r.gamma = RateFunction::custom([](double) { return std::nan(""); });
    EXPECT_EQ(code_of([&] { integrate_rates(r, 1.0); }), ErrorCode::InvalidRates);
    EXPECT_EQ(code_of([] { integrate_rates(RateFunctions{}, -1.0); }), ErrorCode::InvalidInput);
}

TEST(Channels, DephasingAndRelaxationAction) {
    const double g = 0.8, phi = 0.3;
    Mat2 plus = Mat2::Constant(0.5);
    Mat2 out = apply_linear(dephasing_channel(g, phi), plus);
    EXPECT_NEAR(std::abs(out(0, 1)), 0.5 * std::exp(-g), 1e-15);
    EXPECT_NEAR(std::abs(std::arg(out(0, 1))), phi, 1e-15);
    EXPECT_NEAR(out(0, 0).real(), 0.5, 1e-15);

    Mat2 excited = Mat2::Zero();
    excited(1, 1) = 1.0;
    Mat2 relaxed = apply_linear(relaxation_channel(g, phi), excited);
    EXPECT_NEAR(relaxed(1, 1).real(), std::exp(-g), 1e-15);
    EXPECT_NEAR(relaxed(0, 0).real(), 1 - std::exp(-g), 1e-15);
    EXPECT_NEAR(std::abs(apply_linear(relaxation_channel(g, phi), plus)(0, 1)), 0.5 * std::exp(-g / 2), 1e-15);
}

TEST(Channels, AllFamiliesAreCptp) {
    for (double g = 0.0; g <= 3.0; g += 0.25) {
        EXPECT_TRUE(check_cptp(dephasing_channel(g, 0.1)).cptp());
        EXPECT_TRUE(check_cptp(relaxation_channel(g, 0.1)).cptp());
        EXPECT_TRUE(check_cptp(thermalization_channel({0.1, 1.5}, g * 10, 0.1)).cptp());
    }
}

TEST(Channels, SemigroupWithAdditivePhase) {
    const double g1 = 0.4, g2 = 0.9, p1 = 0.2, p2 = -0.7;
    auto check = [](const ChannelRep &ab, const ChannelRep &c) {
        EXPECT_LT((ab.stm() - c.stm()).cwiseAbs().maxCoeff(), 1e-12);
    };
    check(compose(dephasing_channel(g1, p1), dephasing_channel(g2, p2)), dephasing_channel(g1 + g2, p1 + p2));
    check(compose(relaxation_channel(g1, p1), relaxation_channel(g2, p2)), relaxation_channel(g1 + g2, p1 + p2));
    ThermalParams tp{0.05, 2.0};
    check(compose(thermalization_channel(tp, 3.0, p1), thermalization_channel(tp, 5.0, p2)),
          thermalization_channel(tp, 8.0, p1 + p2));
}

TEST(Channels, ZeroTemperatureThermalizationIsRelaxation) {
    for (double t : {0.0, 1.0, 7.0}) {
        auto a = thermalization_channel({0.3, 0.0}, t, 0.4);
        auto b = relaxation_channel(0.3 * t, 0.4);
        EXPECT_LT((a.stm() - b.stm()).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Channels, ThermalSteadyState) {
    for (double n : {0.1, 1.0, 10.0}) {
        ThermalParams tp{0.02, n};
        auto c = thermalization_channel(tp, 20.0 / tp.total_rate(), 0.0);
        for (int b = 0; b < 2; ++b) {
            Mat2 rho = Mat2::Zero();
            rho(b, b) = 1.0;
            EXPECT_NEAR(apply_linear(c, rho)(1, 1).real(), n / (2 * n + 1), 1e-6);
        }
    }
}

TEST(AnalyticPlan, MatchesTheNumericalPipeline) {
    std::vector<NoiseChannelSpec> specs;
    for (NoiseKind k : {NoiseKind::Dephasing, NoiseKind::Relaxation}) {
        NoiseChannelSpec s;
        s.kind = k;
        s.rates.gamma = RateFunction::constant(0.1);
        s.rates.omega_noise = RateFunction::constant(0.05);
        specs.push_back(s);
    }
    for (double n : {0.0, 0.5, 3.0}) {
        NoiseChannelSpec s;
        s.kind = NoiseKind::Thermalization;
        s.thermal = ThermalParams{0.07, n};
        s.rates.omega_noise = RateFunction::constant(-0.02);
        specs.push_back(s);
    }
    for (const auto &spec : specs) {
        for (double t : {0.0, 1.0, 5.0, 30.0}) {
            auto noise = noise_channel(spec, t);
            if (std::abs(noise.ptm().determinant()) < 1e-12) {
                // near-singular noise is flagged by both paths
                EXPECT_EQ(code_of([&] { invert_channel(noise); }), ErrorCode::NotInvertible);
                EXPECT_EQ(code_of([&] { analytic_plan(spec, t); }), ErrorCode::NotInvertible);
                continue;
            }
            MitigationPlan a = analytic_plan(spec, t);
            MitigationPlan b = build_plan(invert_channel(noise));
            EXPECT_NEAR(a.p, b.p, 1e-8);
            EXPECT_LT((a.weighted_ptm() - b.weighted_ptm()).cwiseAbs().maxCoeff(), 1e-8);
            EXPECT_LT(a.reconstruction_error(), 1e-9);
            for (const auto &c : a.circuits) EXPECT_TRUE(check_cptp(c.realization.channel(), 1e-9).cptp());
        }
    }
}

TEST(AnalyticPlan, CircuitCounts) {
    NoiseChannelSpec s;
    s.kind = NoiseKind::Dephasing;
    s.rates.gamma = RateFunction::constant(0.1);
    EXPECT_EQ(analytic_plan(s, 3.0).circuits.size(), 2u);
    s.kind = NoiseKind::Relaxation;
    auto relax = analytic_plan(s, 3.0);
    EXPECT_EQ(relax.circuits.size(), 3u);
    EXPECT_EQ(relax.minus_count(), 1u);
    EXPECT_TRUE(relax.circuits.back().realization.needs_ancilla);
}

TEST(AnalyticPlan, CustomNoiseUsesTheNumericalPipeline) {
    NoiseChannelSpec s;
    s.kind = NoiseKind::CustomPtm;
    EXPECT_EQ(code_of([&] { analytic_plan(s, 1.0); }), ErrorCode::UseNumericalPipeline);
}

TEST(AnalyticPlan, CoherencePlanMatchesDephasing) {
    Complex w = std::polar(0.4, 0.9);
    MitigationPlan a = analytic_coherence_plan(w);
    EXPECT_NEAR(a.p, (1 / 0.4 - 1) / 2, 1e-12);
    EXPECT_LT((a.weighted_ptm() * coherence_channel(w).ptm() - RealMat4::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(code_of([] { analytic_coherence_plan(0.0); }), ErrorCode::NotInvertible);
}

TEST(Frame, DephasingActsOnTheMeasuredAxisAfterConjugation) {
    const double e = std::exp(-0.7);
    RealMat4 p = frame_conjugate(dephasing_channel(0.7, 0.0), measurement_frame()).ptm();
    RealMat4 expected = RealMat4::Identity();
    expected(2, 2) = e;
    expected(3, 3) = e;
    EXPECT_LT((p - expected).cwiseAbs().maxCoeff(), 1e-15);
    // explicit U E(U^dag x U) U^dag with U = exp(-i pi/4 Y)
    Mat2 u = (Complex(0, -kPi / 4) * oracle::paulis()[2]).exp();
    auto map = [&](const Mat2 &x) { return u * apply_linear(dephasing_channel(0.7, 0.2), u.adjoint() * x * u) * u.adjoint(); };
    EXPECT_LT((frame_conjugate(dephasing_channel(0.7, 0.2), measurement_frame()).ptm() - oracle::ptm(map))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-14);
}

}  // namespace
}  // namespace qemsense
