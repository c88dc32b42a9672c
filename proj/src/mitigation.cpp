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

#include "qemsense/mitigation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace qemsense {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp_unit(double x) { return std::clamp(x, -1.0, 1.0); }

// acos that returns exact 0 or pi for arguments within rounding of +-1
double snapped_acos(double x) {
    if (x > 1.0 - 1e-12) return 0.0;
    if (x < -1.0 + 1e-12) return kPi;
    return std::acos(clamp_unit(x));
}

RealMat4 embed_rotation(const RealMat3 &r) {
    RealMat4 out = RealMat4::Identity();
    out.block<3, 3>(1, 1) = r;
    return out;
}

// Choi matrix of the adjoint map; the map is an involution.
Mat4 adjoint_choi(const Mat4 &c) {
    Mat4 out;
    for (int a = 0; a < 2; ++a)
        for (int r = 0; r < 2; ++r)
            for (int b = 0; b < 2; ++b)
                for (int col = 0; col < 2; ++col)
                    out(2 * a + r, 2 * b + col) = std::conj(c(2 * r + a, 2 * col + b));
    return out;
}

void require_trace_preserving(const RealMat4 &ptm, const char *what) {
    Eigen::Vector4d row = ptm.row(0).transpose();
    if (std::abs(row(0) - 1.0) > 1e-9 || row.tail<3>().cwiseAbs().maxCoeff() > 1e-9) {
        throw Error(ErrorCode::InvalidInput, std::string(what) + " is not trace preserving");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// GeneralMap and inversion

GeneralMap GeneralMap::from_ptm(const RealMat4 &ptm, double tolerance) {
    if (!all_finite(ptm)) {
        throw Error(ErrorCode::InvalidInput, "map PTM has non-finite entries");
    }
    if (std::abs(ptm(0, 0) - 1.0) > tolerance || ptm.row(0).tail<3>().cwiseAbs().maxCoeff() > tolerance) {
        throw Error(ErrorCode::InvalidInput, "map is not trace preserving");
    }
    RealMat4 p = ptm;
    p.row(0) << 1.0, 0.0, 0.0, 0.0;
    return GeneralMap(p);
}

double stm_condition_number(const ChannelRep &noise) {
    Eigen::JacobiSVD<Mat4> svd(noise.stm());
    const auto &s = svd.singularValues();
    if (s(3) == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return s(0) / s(3);
}

GeneralMap invert_channel(const ChannelRep &noise) {
    RealMat4 p = noise.ptm();
    require_trace_preserving(p, "noise channel");
    // |det STM| == |det PTM| because the normalised Pauli basis is unitary.
    double det = p.determinant();
    if (!std::isfinite(det) || std::abs(det) < 1e-12) {
        throw Error(ErrorCode::NotInvertible,
                    "noise channel is not invertible (|det| = " + std::to_string(std::abs(det)) + ")");
    }
    RealMat4 inv = p.fullPivLu().inverse();
    inv.row(0) << 1.0, 0.0, 0.0, 0.0;
    return GeneralMap::from_ptm(inv, 1e-6);
}

// ---------------------------------------------------------------------------
// Signed decomposition

SignedDecomposition wittstock_paulsen(const GeneralMap &m) {
    auto eig = hermitian_eigen(m.choi());
    SignedDecomposition sd{Mat4::Zero(), Mat4::Zero(), {}};
    for (int i = 0; i < 4; ++i) {
        double lambda = eig.values(i);
        Eigen::Vector4cd v = eig.vectors.col(i);
        sd.eigenpairs.push_back({lambda, v});
        if (lambda > kEigenvalueCutoff) {
            sd.choi_plus += lambda * v * v.adjoint();
        } else if (lambda < -kEigenvalueCutoff) {
            sd.choi_minus += -lambda * v * v.adjoint();
        }
    }
    return sd;
}

double overhead_bound(const SignedDecomposition &sd) {
    return std::max(0.0, hermitian_eigen(trace_output(sd.choi_minus)).values(0));
}

Mat2 completion_operator(const SignedDecomposition &sd, double p) {
    double bound = overhead_bound(sd);
    if (!(p >= bound - 1e-12)) {
        throw Error(ErrorCode::InvalidOverhead,
                    "p = " + std::to_string(p) + " is below the bound " + std::to_string(bound));
    }
    Mat2 gap = p * Mat2::Identity() - kraus_gram(sd.choi_minus);
    // p at the bound leaves a zero eigenvalue that rounding makes +-1e-16;
    // snap it, since its square root would otherwise be 1e-8
    auto eig = hermitian_eigen(gap);
    const double floor = 1e-12 * std::max(1.0, p);
    Mat2 d = Mat2::Zero();
    for (int i = 0; i < 2; ++i) {
        double v = eig.values(i) < floor ? 0.0 : eig.values(i);
        d += std::sqrt(v) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
    return d;
}

double overhead(const GeneralMap &m) { return overhead_bound(wittstock_paulsen(m)); }

CptpPair cptp_pair(const GeneralMap &m) {
    SignedDecomposition sd = wittstock_paulsen(m);
    double p = overhead_bound(sd);
    Mat2 d = completion_operator(sd, p);
    Mat4 cd = kraus_outer(d);
    ChannelRep plus = ChannelRep::from_choi((sd.choi_plus + cd) / (1.0 + p));
    ChannelRep minus = ChannelRep::identity();
    if (p > 0.0) {
        minus = ChannelRep::from_choi((sd.choi_minus + cd) / p);
    }
    return {plus, minus, p, d};
}

// ---------------------------------------------------------------------------
// Extremal maps

bool is_extremal(const ChannelRep &c, double tolerance) {
    Mat4 choi = c.choi();
    auto eig = hermitian_eigen(choi);
    double scale = std::max(1.0, eig.values(0));
    std::vector<Mat2> ops;
    for (int i = 0; i < 4; ++i) {
        if (eig.values(i) > tol::psd * scale) {
            Mat2 k;
            for (int a = 0; a < 2; ++a)
                for (int r = 0; r < 2; ++r) k(r, a) = eig.vectors(2 * a + r, i);
            ops.push_back(k / k.norm());
        }
    }
    if (ops.size() <= 1) {
        return true;
    }
    if (ops.size() > 2) {
        return false;
    }
    Mat4 products;
    int col = 0;
    for (int i = 0; i < 2; ++i) {
        for (int j = 0; j < 2; ++j) {
            Mat2 prod = ops[i].adjoint() * ops[j];
            for (int k = 0; k < 4; ++k) products(k, col) = prod(k / 2, k % 2);
            ++col;
        }
    }
    Eigen::JacobiSVD<Mat4> svd(products);
    return svd.singularValues()(3) > tolerance;
}

std::vector<ChannelRep> extremal_split(const ChannelRep &c) {
    auto report = check_cptp(c, 1e-9);
    if (!report.cptp()) {
        throw Error(ErrorCode::InvalidInput, "extremal_split requires a CPTP map");
    }
    if (is_extremal(c)) {
        return {ChannelRep::from_choi(c.choi())};
    }

    Mat4 adj = adjoint_choi(c.choi());
    Mat2 a = adj.block<2, 2>(0, 0);
    Mat2 x = adj.block<2, 2>(0, 2);

    auto eig = hermitian_eigen(a);
    const Mat2 &q = eig.vectors;
    // eigenvalues within rounding of 0 or 1 are snapped so that sqrt() does
    // not promote 1e-16 noise to 1e-8
    constexpr double eps = 1e-12;
    Eigen::Vector2d av;
    for (int k = 0; k < 2; ++k) {
        double v = eig.values(k);
        av(k) = v < eps ? 0.0 : (v > 1.0 - eps ? 1.0 : v);
    }
    Mat2 xp = q.adjoint() * x * q;

    // contraction R with X = sqrt(A) R sqrt(1 - A), in the eigenbasis of A;
    // entries on a null row or column are left at zero
    Mat2 r = Mat2::Zero();
    for (int k = 0; k < 2; ++k) {
        for (int l = 0; l < 2; ++l) {
            if (av(k) > 0.0 && av(l) < 1.0) {
                r(k, l) = xp(k, l) / (std::sqrt(av(k)) * std::sqrt(1.0 - av(l)));
            }
        }
    }

    Eigen::JacobiSVD<Mat2> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Vector2d s = svd.singularValues().cwiseMin(1.0);
    Mat2 sqrt_a = Mat2::Zero();
    Mat2 sqrt_b = Mat2::Zero();
    Mat2 a_clean = Mat2::Zero();
    for (int k = 0; k < 2; ++k) {
        sqrt_a(k, k) = std::sqrt(av(k));
        sqrt_b(k, k) = std::sqrt(1.0 - av(k));
        a_clean(k, k) = av(k);
    }

    std::vector<ChannelRep> halves;
    for (double sign : {1.0, -1.0}) {
        Mat2 phases = Mat2::Zero();
        for (int k = 0; k < 2; ++k) {
            phases(k, k) = std::polar(1.0, sign * snapped_acos(s(k)));
        }
        Mat2 u = svd.matrixU() * phases * svd.matrixV().adjoint();
        Mat2 xk = q * (sqrt_a * u * sqrt_b) * q.adjoint();
        Mat4 half = Mat4::Zero();
        half.block<2, 2>(0, 0) = q * a_clean * q.adjoint();
        half.block<2, 2>(2, 2) = q * (Mat2::Identity() - a_clean) * q.adjoint();
        half.block<2, 2>(0, 2) = xk;
        half.block<2, 2>(2, 0) = xk.adjoint();
        halves.push_back(ChannelRep::from_choi(adjoint_choi(half)));
    }
    return halves;
}

std::array<Mat2, 2> trigonometric_kraus(double nu, double mu) {
    Mat2 ka = Mat2::Zero();
    ka(0, 0) = std::cos((mu - nu) / 2);
    ka(1, 1) = std::cos((mu + nu) / 2);
    Mat2 kb = Mat2::Zero();
    kb(0, 1) = std::sin((mu + nu) / 2);
    kb(1, 0) = std::sin((mu - nu) / 2);
    return {ka, kb};
}

RealMat4 trigonometric_ptm(double nu, double mu) {
    RealMat4 p = RealMat4::Zero();
    p(0, 0) = 1.0;
    p(1, 1) = std::cos(nu);
    p(2, 2) = std::cos(mu);
    p(3, 3) = std::cos(mu) * std::cos(nu);
    p(3, 0) = std::sin(mu) * std::sin(nu);
    return p;
}

ExtremalRealization ExtremalRealization::from_angles(double nu, double mu, const Rotation &pre,
                                                     const Rotation &post) {
    auto [ka, kb] = trigonometric_kraus(nu, mu);
    ExtremalRealization out;
    out.pre_rotation = pre;
    out.post_rotation = post;
    out.nu = nu;
    out.mu = mu;
    out.needs_ancilla = kb.cwiseAbs().maxCoeff() > 1e-10;
    out.kraus = out.needs_ancilla ? KrausSet({ka, kb}) : KrausSet({ka}, Completeness::SubNormalized, 1.0);
    return out;
}

ExtremalRealization ExtremalRealization::from_unitary(const Mat2 &u) {
    RealMat4 p = stm_to_ptm(kraus_to_stm({u}));
    return from_angles(0.0, 0.0, Rotation::identity(), Rotation::from_so3(p.block<3, 3>(1, 1)));
}

std::vector<Mat2> ExtremalRealization::channel_kraus() const {
    Mat2 pre = pre_rotation.unitary();
    Mat2 post = post_rotation.unitary();
    std::vector<Mat2> ops;
    for (const auto &k : kraus.operators()) {
        ops.push_back(post * k * pre);
    }
    return ops;
}

ChannelRep ExtremalRealization::channel() const {
    return ChannelRep::from_kraus(KrausSet(channel_kraus(), Completeness::SubNormalized, 1.0 + 1e-9));
}

RealMat4 ExtremalRealization::ptm() const { return stm_to_ptm(kraus_to_stm(channel_kraus())); }

namespace {

struct NormalFormFit {
    double residual = std::numeric_limits<double>::infinity();
    double nu = 0.0;
    double mu = 0.0;
    RealMat3 v;
    RealMat3 w;
};

NormalFormFit fit_normal_form(const RealMat3 &v_in, const Eigen::Vector3d &sigma, const RealMat3 &w_in,
                              const Eigen::Vector3d &t, int k) {
    int i = (k == 0) ? 1 : 0;
    int j = (k == 2) ? 1 : 2;
    RealMat3 perm = RealMat3::Zero();
    perm(i, 0) = 1.0;
    perm(j, 1) = 1.0;
    perm(k, 2) = 1.0;
    RealMat3 v = v_in * perm;
    RealMat3 w = w_in * perm;
    Eigen::Vector3d s(sigma(i), sigma(j), sigma(k));
    if (v.determinant() < 0) {
        v.col(2) *= -1.0;
        s(2) *= -1.0;
    }
    if (w.determinant() < 0) {
        w.col(2) *= -1.0;
        s(2) *= -1.0;
    }
    Eigen::Vector3d tt = v.transpose() * t;

    NormalFormFit fit;
    fit.nu = snapped_acos(s(0));
    double mu0 = snapped_acos(s(1));
    fit.mu = (std::sin(fit.nu) > 1e-12 && tt(2) < 0.0) ? 2.0 * kPi - mu0 : mu0;
    fit.residual = std::max({std::abs(tt(0)), std::abs(tt(1)),
                             std::abs(s(2) - std::cos(fit.mu) * std::cos(fit.nu)),
                             std::abs(tt(2) - std::sin(fit.mu) * std::sin(fit.nu))});
    fit.v = v;
    fit.w = w;
    return fit;
}

}  // namespace

ExtremalRealization realize_extremal(const ChannelRep &e) {
    RealMat4 p = e.ptm();
    require_trace_preserving(p, "extremal map");
    RealMat3 t_mat = p.block<3, 3>(1, 1);
    Eigen::Vector3d t = p.block<3, 1>(1, 0);

    Eigen::JacobiSVD<RealMat3> svd(t_mat, Eigen::ComputeFullU | Eigen::ComputeFullV);
    RealMat3 v = svd.matrixU();
    RealMat3 w = svd.matrixV();
    Eigen::Vector3d sigma = svd.singularValues();

    // inside a block of equal singular values the SVD frame is arbitrary;
    // rotate it so the translation has a single component in the block
    for (int start = 0; start < 3;) {
        int end = start + 1;
        while (end < 3 && std::abs(sigma(end) - sigma(start)) < 1e-9) ++end;
        const int size = end - start;
        Eigen::VectorXd u = (v.middleCols(start, size).transpose() * t);
        if (size > 1 && u.norm() > 1e-12) {
            Eigen::MatrixXd basis = Eigen::MatrixXd::Identity(size, size);
            basis.col(size - 1) = u.normalized();
            // Gram-Schmidt of the remaining unit vectors against u
            Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis.rightCols(1));
            Eigen::MatrixXd q = qr.householderQ();
            Eigen::MatrixXd rot(size, size);
            rot.leftCols(size - 1) = q.rightCols(size - 1);
            rot.col(size - 1) = u.normalized();
            v.middleCols(start, size) = (v.middleCols(start, size) * rot).eval();
            w.middleCols(start, size) = (w.middleCols(start, size) * rot).eval();
        }
        start = end;
    }

    Eigen::Vector3d tt = (v.transpose() * t).cwiseAbs();
    int preferred = 2;
    if (tt.maxCoeff() > 1e-9) {
        tt.maxCoeff(&preferred);
    }
    NormalFormFit best = fit_normal_form(v, sigma, w, t, preferred);
    for (int k = 0; k < 3; ++k) {
        if (k == preferred) {
            continue;
        }
        NormalFormFit fit = fit_normal_form(v, sigma, w, t, k);
        if (fit.residual < best.residual - 1e-14) {
            best = fit;
        }
    }
    if (best.residual > 1e-8) {
        throw Error(ErrorCode::NotExtremal,
                    "map does not have the trigonometric normal form (residual " +
                        std::to_string(best.residual) + ")");
    }
    return ExtremalRealization::from_angles(best.nu, best.mu, Rotation::from_so3(best.w.transpose()),
                                            Rotation::from_so3(best.v));
}

// ---------------------------------------------------------------------------
// Plans

RealMat4 MitigationPlan::weighted_ptm() const {
    RealMat4 sum = RealMat4::Zero();
    for (const auto &c : circuits) {
        sum += c.signed_weight() * c.realization.ptm();
    }
    return sum;
}

double MitigationPlan::reconstruction_error() const { return max_abs(RealMat4(weighted_ptm() - target_ptm)); }

std::size_t MitigationPlan::plus_count() const {
    return static_cast<std::size_t>(std::count_if(circuits.begin(), circuits.end(),
                                                  [](const auto &c) { return c.sign == CircuitSign::Plus; }));
}

std::size_t MitigationPlan::minus_count() const { return circuits.size() - plus_count(); }

MitigationPlan assemble_plan(double p, const std::vector<ExtremalRealization> &plus,
                             const std::vector<ExtremalRealization> &minus, const RealMat4 &target_ptm) {
    if (plus.empty()) {
        throw Error(ErrorCode::InvalidInput, "a plan needs at least one plus circuit");
    }
    if (p > 0.0 && minus.empty()) {
        throw Error(ErrorCode::InvalidInput, "a plan with p > 0 needs a minus circuit");
    }
    MitigationPlan plan;
    plan.p = p;
    plan.target_ptm = target_ptm;
    const double total = 2.0 * p + 1.0;
    for (const auto &r : plus) {
        double w = (1.0 + p) / static_cast<double>(plus.size());
        plan.circuits.push_back({CircuitSign::Plus, w, w / total, r});
    }
    if (p > 0.0) {
        for (const auto &r : minus) {
            double w = p / static_cast<double>(minus.size());
            plan.circuits.push_back({CircuitSign::Minus, w, w / total, r});
        }
    }
    return plan;
}

MitigationPlan build_plan(const GeneralMap &m) {
    CptpPair pair = cptp_pair(m);
    std::vector<ExtremalRealization> plus;
    for (const auto &half : extremal_split(pair.m_plus)) {
        plus.push_back(realize_extremal(half));
    }
    std::vector<ExtremalRealization> minus;
    if (pair.p > 0.0) {
        for (const auto &half : extremal_split(pair.m_minus)) {
            minus.push_back(realize_extremal(half));
        }
    }
    return assemble_plan(pair.p, plus, minus, m.ptm());
}

MitigationPlan conjugate_plan(const MitigationPlan &plan, const Rotation &rotation) {
    RealMat3 r = rotation.so3();
    MitigationPlan out = plan;
    out.target_ptm = embed_rotation(r) * plan.target_ptm * embed_rotation(r.transpose());
    for (auto &c : out.circuits) {
        auto &real = c.realization;
        real.post_rotation = Rotation::from_so3(r * real.post_rotation.so3());
        real.pre_rotation = Rotation::from_so3(real.pre_rotation.so3() * r.transpose());
    }
    return out;
}

// ---------------------------------------------------------------------------
// Observable-restricted optimisation

std::vector<GeneralMap> mitigation_candidates(const GeneralMap &inverse, PauliAxis axis) {
    const int row = static_cast<int>(axis);
    std::vector<GeneralMap> out{inverse};
    for (double scale : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        RealMat4 p = RealMat4::Zero();
        p(0, 0) = 1.0;
        p.row(row) = inverse.ptm().row(row);
        for (int other = 1; other < 4; ++other) {
            if (other != row) {
                p(other, other) = scale * inverse.ptm()(other, other);
            }
        }
        out.push_back(GeneralMap::from_ptm(p));
    }
    return out;
}

namespace {

GeneralMap compass_refine(const GeneralMap &start, double start_p, PauliAxis axis, int max_iterations) {
    const int row = static_cast<int>(axis);
    std::vector<std::pair<int, int>> free;
    for (int r = 1; r < 4; ++r) {
        if (r == row) continue;
        for (int c = 0; c < 4; ++c) free.emplace_back(r, c);
    }
    RealMat4 best = start.ptm();
    double best_p = start_p;
    double step = 0.25;
    for (int it = 0; it < max_iterations && step > 1e-6; ++it) {
        bool improved = false;
        for (auto [r, c] : free) {
            for (double dir : {1.0, -1.0}) {
                RealMat4 trial = best;
                trial(r, c) += dir * step;
                double p = overhead(GeneralMap::from_ptm(trial));
                if (p < best_p - 1e-14) {
                    best = trial;
                    best_p = p;
                    improved = true;
                }
            }
        }
        if (!improved) {
            step /= 2.0;
        }
    }
    return GeneralMap::from_ptm(best);
}

}  // namespace

OptimizedMitigation optimize_mitigation_map(const ChannelRep &noise, const OptimizeOptions &options) {
    GeneralMap inverse = invert_channel(noise);
    auto candidates = mitigation_candidates(inverse, options.axis);
    OptimizedMitigation out;
    out.p_inverse = overhead(inverse);
    double best_p = out.p_inverse;
    int best = 0;
    for (int i = 1; i < static_cast<int>(candidates.size()); ++i) {
        double p = overhead(candidates[i]);
        if (p < best_p) {
            best_p = p;
            best = i;
        }
    }
    GeneralMap chosen = candidates[best];
    if (options.refine) {
        chosen = compass_refine(chosen, best_p, options.axis, options.max_refine_iterations);
        best_p = std::min(best_p, overhead(chosen));
    }
    out.map = chosen;
    out.candidate_index = best;
    out.plan = build_plan(chosen);
    out.p = out.plan.p;
    return out;
}

}  // namespace qemsense
