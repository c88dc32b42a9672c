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

#include <numbers>
#include <random>

#include "oracles.hpp"
#include "qemsense/qmatrix.hpp"

namespace qemsense {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(Pauli, Algebra) {
    const auto &s = pauli();
    EXPECT_LT((s[1] * s[2] - Complex(0, 1) * s[3]).cwiseAbs().maxCoeff(), 1e-15);
    for (int i = 1; i < 4; ++i) EXPECT_LT((s[i] * s[i] - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_EQ(matrix_unit(1)(0, 1), Complex(1.0));
    EXPECT_EQ(matrix_unit(2)(1, 0), Complex(1.0));
}

TEST(Representations, MatchBruteForceForRandomChannels) {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 50; ++trial) {
        auto ops = oracle::random_kraus(rng, 1 + trial % 4);
        auto rep = ChannelRep::from_kraus(KrausSet(ops));
        auto map = [&](const Mat2 &x) { return oracle::apply(ops, x); };
        EXPECT_LT((rep.choi() - oracle::choi(map)).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((rep.ptm() - oracle::ptm(map)).cwiseAbs().maxCoeff(), 1e-12);
        // row-major vectorisation: vec(M(x)) = S vec(x)
        Mat2 x = oracle::random_unitary(rng) * Complex(0.3, -0.7);
        Mat2 y = map(x);
        Eigen::Vector4cd vx(x(0, 0), x(0, 1), x(1, 0), x(1, 1));
        Eigen::Vector4cd vy = rep.stm() * vx;
        EXPECT_LT((Eigen::Vector4cd(y(0, 0), y(0, 1), y(1, 0), y(1, 1)) - vy).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Representations, RoundTripsThroughEveryKind) {
    std::mt19937_64 rng(2);
    const RepKind kinds[] = {RepKind::Kraus, RepKind::Choi, RepKind::Stm, RepKind::Ptm};
    for (int trial = 0; trial < 30; ++trial) {
        auto rep = ChannelRep::from_kraus(KrausSet(oracle::random_kraus(rng, 1 + trial % 4)));
        for (RepKind a : kinds)
            for (RepKind b : kinds) {
                ChannelRep back = convert(convert(rep, a), b);
                EXPECT_LT((back.ptm() - rep.ptm()).cwiseAbs().maxCoeff(), 1e-11);
            }
        EXPECT_TRUE(check_cptp(rep).cptp());
        EXPECT_NEAR(rep.ptm()(0, 0), 1.0, 1e-12);
        EXPECT_LT(rep.ptm().row(0).tail<3>().cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Representations, KrausFromChoiReproducesTheMap) {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 30; ++trial) {
        auto ops = oracle::random_kraus(rng, 1 + trial % 4);
        Mat4 c = ChannelRep::from_kraus(KrausSet(ops)).choi();
        auto k = choi_kraus_operators(c);
        EXPECT_LE(k.size(), 4u);
        EXPECT_LT((kraus_to_stm(k) - kraus_to_stm(ops)).cwiseAbs().maxCoeff(), 1e-11);
        EXPECT_LT((kraus_gram(c) - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-11);
        EXPECT_LT((trace_output(c) - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-11);
    }
}

TEST(Representations, AmplitudeDampingByHand) {
    const double g = 0.3;
    Mat2 k0, k1;
    k0 << 1, 0, 0, std::sqrt(1 - g);
    k1 << 0, std::sqrt(g), 0, 0;
    RealMat4 p = ChannelRep::from_kraus(KrausSet({k0, k1})).ptm();
    RealMat4 expected;
    expected << 1, 0, 0, 0, 0, std::sqrt(1 - g), 0, 0, 0, 0, std::sqrt(1 - g), 0, g, 0, 0, 1 - g;
    EXPECT_LT((p - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(Cptp, TransposeIsNotCompletelyPositive) {
    RealMat4 t = RealMat4::Identity();
    t(2, 2) = -1.0;  // Y -> -Y is the transpose
    CPTPReport r = check_cptp(ChannelRep::from_ptm(t));
    EXPECT_TRUE(r.tp);
    EXPECT_FALSE(r.cp);
    EXPECT_NEAR(r.min_choi_eigenvalue, -1.0, 1e-12);
    EXPECT_THROW(choi_kraus_operators(ChannelRep::from_ptm(t).choi()), Error);
}

TEST(Cptp, TraceDecreasingIsNotTracePreserving) {
    Mat2 k;
    k << 1, 0, 0, 0.5;
    auto rep = ChannelRep::from_kraus(KrausSet({k}, Completeness::SubNormalized));
    EXPECT_FALSE(check_cptp(rep).tp);
    try {
        KrausSet bad({k});
        ADD_FAILURE() << "incomplete Kraus set accepted";
    } catch (const Error &e) {
        EXPECT_EQ(e.code(), ErrorCode::InvalidInput);
    }
}

TEST(Compose, MatchesSequentialApplication) {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 20; ++trial) {
        auto a = oracle::random_kraus(rng, 2);
        auto b = oracle::random_kraus(rng, 3);
        auto ab = compose(ChannelRep::from_kraus(KrausSet(a)), ChannelRep::from_kraus(KrausSet(b)));
        auto map = [&](const Mat2 &x) { return oracle::apply(a, oracle::apply(b, x)); };
        EXPECT_LT((ab.ptm() - oracle::ptm(map)).cwiseAbs().maxCoeff(), 1e-12);
        Mat2 x = oracle::random_unitary(rng);
        EXPECT_LT((apply_linear(ab, x) - map(x)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Rotation, UnitaryAndSo3Agree) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 50; ++trial) {
        Rotation r{Vec3(n(rng), n(rng), n(rng)).normalized(), 4 * kPi * (n(rng))};
        RealMat4 p = ChannelRep::unitary(r.unitary()).ptm();
        EXPECT_LT((p.bottomRightCorner<3, 3>() - r.so3()).cwiseAbs().maxCoeff(), 1e-12);
        Rotation back = Rotation::from_so3(r.so3());
        EXPECT_LT((back.so3() - r.so3()).cwiseAbs().maxCoeff(), 1e-10);
        EXPECT_LT((r.inverse().so3() * r.so3() - RealMat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
    }
    // R_z(pi/2) takes x to y
    Vec3 y = Rotation::about(PauliAxis::Z, kPi / 2).so3() * Vec3::UnitX();
    EXPECT_LT((y - Vec3::UnitY()).norm(), 1e-15);
}

TEST(Rotation, FromSo3HandlesHalfTurns) {
    for (PauliAxis ax : {PauliAxis::X, PauliAxis::Y, PauliAxis::Z}) {
        RealMat3 r = Rotation::about(ax, kPi).so3();
        EXPECT_LT((Rotation::from_so3(r).so3() - r).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_LT((Rotation::from_so3(RealMat3::Identity()).so3() - RealMat3::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(HermitianEigen, ReconstructsAndSorts) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 50; ++trial) {
        Mat4 a;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) a(i, j) = Complex(n(rng), n(rng));
        Mat4 h = a + a.adjoint();
        auto e = hermitian_eigen(h);
        for (int i = 0; i < 3; ++i) EXPECT_GE(e.values(i), e.values(i + 1));
        Mat4 back = e.vectors * e.values.cast<Complex>().asDiagonal() * e.vectors.adjoint();
        EXPECT_LT((back - h).cwiseAbs().maxCoeff(), 1e-12);
    }
    auto d = hermitian_eigen(Mat2(Mat2::Identity()));
    EXPECT_EQ(d.values(0), 1.0);
    EXPECT_LT((d.vectors - Mat2::Identity()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(PsdSqrt, SquaresBack) {
    Mat2 m;
    m << 2, Complex(0, 1), Complex(0, -1), 1;
    Mat2 r = psd_sqrt(m);
    EXPECT_LT((r * r - m).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_LT((r - r.adjoint()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(DensityMatrix, BlochRoundTripAndValidation) {
    Vec3 r(0.3, -0.4, 0.5);
    auto rho = DensityMatrix::from_bloch(r);
    EXPECT_LT((rho.bloch() - r).norm(), 1e-15);
    EXPECT_NEAR(rho.expectation(PauliAxis::Z), 0.5, 1e-15);
    EXPECT_THROW(DensityMatrix::from_bloch(Vec3(1.0, 1.0, 0.0)), Error);
    Mat2 not_unit_trace = Mat2::Identity();
    EXPECT_THROW(DensityMatrix::from_matrix(not_unit_trace), Error);
}

}  // namespace
}  // namespace qemsense
