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

#include "qemsense/qmatrix.hpp"

#include <algorithm>
#include <cmath>

namespace qemsense {

std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidInput: return "InvalidInput";
        case ErrorCode::NotCompletelyPositive: return "NotCompletelyPositive";
        case ErrorCode::NotInvertible: return "NotInvertible";
        case ErrorCode::InvalidOverhead: return "InvalidOverhead";
        case ErrorCode::NotExtremal: return "NotExtremal";
        case ErrorCode::InvalidRates: return "InvalidRates";
        case ErrorCode::Unphysical: return "Unphysical";
        case ErrorCode::UseNumericalPipeline: return "UseNumericalPipeline";
        case ErrorCode::TooManySpins: return "TooManySpins";
        case ErrorCode::Singular: return "Singular";
        case ErrorCode::InfiniteT2: return "InfiniteT2";
        case ErrorCode::GridViolation: return "GridViolation";
        case ErrorCode::TooFewShots: return "TooFewShots";
        case ErrorCode::DegenerateProtocol: return "DegenerateProtocol";
    }
    return "Unknown";
}

const std::array<Mat2, 4> &pauli() {
    static const std::array<Mat2, 4> ops = [] {
        const Complex i{0.0, 1.0};
        std::array<Mat2, 4> s;
        s[0] << 1, 0, 0, 1;
        s[1] << 0, 1, 1, 0;
        s[2] << 0, -i, i, 0;
        s[3] << 1, 0, 0, -1;
        return s;
    }();
    return ops;
}

Mat2 matrix_unit(int k) {
    Mat2 m = Mat2::Zero();
    m(k / 2, k % 2) = 1.0;
    return m;
}

double max_abs(const Mat4 &m) { return m.cwiseAbs().maxCoeff(); }
double max_abs(const RealMat4 &m) { return m.cwiseAbs().maxCoeff(); }

// ---------------------------------------------------------------------------
// Rotation

Rotation Rotation::about(PauliAxis axis, double angle) {
    Vec3 n = Vec3::Zero();
    n(static_cast<int>(axis) - 1) = 1.0;
    return {n, angle};
}

Rotation Rotation::from_so3(const RealMat3 &r) {
    Eigen::AngleAxisd aa(r);
    if (std::abs(aa.angle()) < 1e-15) {
        return identity();
    }
    return {aa.axis().normalized(), aa.angle()};
}

Mat2 Rotation::unitary() const {
    const auto &s = pauli();
    Vec3 n = axis.norm() > 0 ? Vec3(axis.normalized()) : Vec3(Vec3::UnitZ());
    const Complex i{0.0, 1.0};
    return std::cos(angle / 2) * s[0] -
           i * std::sin(angle / 2) * (n(0) * s[1] + n(1) * s[2] + n(2) * s[3]);
}

RealMat3 Rotation::so3() const {
    Vec3 n = axis.norm() > 0 ? Vec3(axis.normalized()) : Vec3(Vec3::UnitZ());
    return Eigen::AngleAxisd(angle, n).toRotationMatrix();
}

// ---------------------------------------------------------------------------
// Hermitian eigensolver

namespace {

template <int N>
void canonicalise(Eigen::Matrix<double, N, 1> &values, Eigen::Matrix<Complex, N, N> &vectors) {
    // descending order
    values.reverseInPlace();
    vectors = vectors.rowwise().reverse().eval();

    const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
    int start = 0;
    while (start < N) {
        int end = start + 1;
        while (end < N && std::abs(values(end - 1) - values(end)) < 1e-10 * scale) {
            ++end;
        }
        // keep the solver's column order inside the cluster, then modified Gram-Schmidt
        for (int a = start, b = end - 1; a < b; ++a, --b) {
            vectors.col(a).swap(vectors.col(b));
        }
        for (int j = start; j < end; ++j) {
            for (int k = start; k < j; ++k) {
                Complex overlap = vectors.col(k).dot(vectors.col(j));
                vectors.col(j) -= overlap * vectors.col(k);
            }
            vectors.col(j).normalize();
        }
        start = end;
    }

    for (int j = 0; j < N; ++j) {
        int best = 0;
        for (int i = 1; i < N; ++i) {
            if (std::abs(vectors(i, j)) > std::abs(vectors(best, j)) + 1e-12) {
                best = i;
            }
        }
        Complex phase = vectors(best, j) / std::abs(vectors(best, j));
        vectors.col(j) *= std::conj(phase);
    }
}

template <int N>
std::pair<Eigen::Matrix<double, N, 1>, Eigen::Matrix<Complex, N, N>> eigen_impl(
    const Eigen::Matrix<Complex, N, N> &m) {
    Eigen::Matrix<Complex, N, N> h = (m + m.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, N, N>> solver(h);
    Eigen::Matrix<double, N, 1> values = solver.eigenvalues();
    Eigen::Matrix<Complex, N, N> vectors = solver.eigenvectors();
    canonicalise<N>(values, vectors);
    return {values, vectors};
}

}  // namespace

HermitianEigen2 hermitian_eigen(const Mat2 &m) {
    auto [values, vectors] = eigen_impl<2>(m);
    return {values, vectors};
}

HermitianEigen4 hermitian_eigen(const Mat4 &m) {
    auto [values, vectors] = eigen_impl<4>(m);
    return {values, vectors};
}

Mat2 psd_sqrt(const Mat2 &m) {
    auto eig = hermitian_eigen(m);
    Mat2 out = Mat2::Zero();
    for (int i = 0; i < 2; ++i) {
        double v = eig.values(i);
        if (v < -tol::psd) {
            throw Error(ErrorCode::InvalidInput, "psd_sqrt: matrix has a negative eigenvalue");
        }
        out += std::sqrt(std::max(v, 0.0)) * eig.vectors.col(i) * eig.vectors.col(i).adjoint();
    }
    return out;
}

// ---------------------------------------------------------------------------
// DensityMatrix

DensityMatrix DensityMatrix::from_matrix(const Mat2 &m) {
    if (!all_finite(m)) {
        throw Error(ErrorCode::InvalidInput, "density matrix has non-finite entries");
    }
    if ((m - m.adjoint()).cwiseAbs().maxCoeff() > tol::herm) {
        throw Error(ErrorCode::InvalidInput, "density matrix is not Hermitian");
    }
    if (std::abs(m.trace() - 1.0) > tol::trace) {
        throw Error(ErrorCode::InvalidInput, "density matrix trace differs from one");
    }
    if (hermitian_eigen(m).values(1) < -tol::psd) {
        throw Error(ErrorCode::InvalidInput, "density matrix is not positive semidefinite");
    }
    return DensityMatrix((m + m.adjoint()) / 2.0);
}

DensityMatrix DensityMatrix::from_bloch(const Vec3 &r) {
    const auto &s = pauli();
    return from_matrix((s[0] + r(0) * s[1] + r(1) * s[2] + r(2) * s[3]) / 2.0);
}

double DensityMatrix::expectation(PauliAxis axis) const {
    return (m_ * pauli()[static_cast<int>(axis)]).trace().real();
}

Vec3 DensityMatrix::bloch() const {
    return {expectation(PauliAxis::X), expectation(PauliAxis::Y), expectation(PauliAxis::Z)};
}

// ---------------------------------------------------------------------------
// KrausSet

KrausSet::KrausSet(std::vector<Mat2> ops, Completeness completeness, double bound,
                   double tolerance)
    : ops_(std::move(ops)), completeness_(completeness), bound_(bound) {
    if (ops_.empty()) {
        throw Error(ErrorCode::InvalidInput, "Kraus set is empty");
    }
    for (const auto &k : ops_) {
        if (!all_finite(k)) {
            throw Error(ErrorCode::InvalidInput, "Kraus operator has non-finite entries");
        }
    }
    Mat2 g = gram();
    if (completeness_ == Completeness::TracePreserving) {
        bound_ = 1.0;
        if ((g - Mat2::Identity()).cwiseAbs().maxCoeff() > tolerance) {
            throw Error(ErrorCode::InvalidInput, "Kraus operators are not trace preserving");
        }
    } else if (hermitian_eigen(g).values(0) > bound_ + tolerance) {
        throw Error(ErrorCode::InvalidInput, "Kraus operators exceed their sub-normalisation bound");
    }
}

Mat2 KrausSet::gram() const {
    Mat2 g = Mat2::Zero();
    for (const auto &k : ops_) {
        g += k.adjoint() * k;
    }
    return g;
}

// ---------------------------------------------------------------------------
// Representation changes

namespace {

Mat4 pauli_basis_columns() {
    Mat4 b;
    const auto &s = pauli();
    for (int j = 0; j < 4; ++j) {
        for (int k = 0; k < 4; ++k) {
            b(k, j) = s[j](k / 2, k % 2);
        }
    }
    return b;
}

const Mat4 &pauli_basis() {
    static const Mat4 b = pauli_basis_columns();
    return b;
}

}  // namespace

Mat4 kraus_to_stm(const std::vector<Mat2> &ops) {
    Mat4 s = Mat4::Zero();
    for (const auto &k : ops) {
        Mat2 kc = k.conjugate();
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                for (int c = 0; c < 2; ++c)
                    for (int d = 0; d < 2; ++d) s(2 * a + c, 2 * b + d) += k(a, b) * kc(c, d);
    }
    return s;
}

Mat4 stm_to_choi(const Mat4 &stm) {
    Mat4 c;
    for (int a = 0; a < 2; ++a)
        for (int r = 0; r < 2; ++r)
            for (int b = 0; b < 2; ++b)
                for (int col = 0; col < 2; ++col)
                    c(2 * a + r, 2 * b + col) = stm(2 * r + col, 2 * a + b);
    return c;
}

Mat4 choi_to_stm(const Mat4 &choi) {
    Mat4 s;
    for (int a = 0; a < 2; ++a)
        for (int r = 0; r < 2; ++r)
            for (int b = 0; b < 2; ++b)
                for (int col = 0; col < 2; ++col)
                    s(2 * r + col, 2 * a + b) = choi(2 * a + r, 2 * b + col);
    return s;
}

RealMat4 stm_to_ptm(const Mat4 &stm) {
    const Mat4 &b = pauli_basis();
    Mat4 p = b.adjoint() * stm * b / 2.0;
    if (p.imag().cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, p.real().cwiseAbs().maxCoeff())) {
        throw Error(ErrorCode::InvalidInput, "map is not Hermiticity preserving; PTM is not real");
    }
    return p.real();
}

Mat4 ptm_to_stm(const RealMat4 &ptm) {
    const Mat4 &b = pauli_basis();
    return b * ptm.cast<Complex>() * b.adjoint() / 2.0;
}

Mat4 kraus_outer(const Mat2 &k) {
    Eigen::Vector4cd v;
    for (int a = 0; a < 2; ++a)
        for (int r = 0; r < 2; ++r) v(2 * a + r) = k(r, a);
    return v * v.adjoint();
}

std::vector<Mat2> choi_kraus_operators(const Mat4 &choi, double tolerance) {
    auto eig = hermitian_eigen(choi);
    if (eig.values(3) < -tolerance) {
        throw Error(ErrorCode::NotCompletelyPositive,
                    "Choi matrix has eigenvalue " + std::to_string(eig.values(3)));
    }
    std::vector<Mat2> ops;
    for (int i = 0; i < 4; ++i) {
        if (eig.values(i) <= tolerance) {
            continue;
        }
        Mat2 k;
        double w = std::sqrt(eig.values(i));
        for (int a = 0; a < 2; ++a)
            for (int r = 0; r < 2; ++r) k(r, a) = w * eig.vectors(2 * a + r, i);
        ops.push_back(k);
    }
    if (ops.empty()) {
        ops.push_back(Mat2::Zero());
    }
    return ops;
}

Mat2 trace_output(const Mat4 &choi) {
    Mat2 t = Mat2::Zero();
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (int r = 0; r < 2; ++r) t(a, b) += choi(2 * a + r, 2 * b + r);
    return t;
}

Mat2 kraus_gram(const Mat4 &choi) { return trace_output(choi).transpose(); }

// ---------------------------------------------------------------------------
// ChannelRep

ChannelRep ChannelRep::from_kraus(KrausSet k) { return ChannelRep(RepKind::Kraus, std::move(k)); }

ChannelRep ChannelRep::from_choi(const Mat4 &choi) {
    if (!all_finite(choi)) {
        throw Error(ErrorCode::InvalidInput, "Choi matrix has non-finite entries");
    }
    if ((choi - choi.adjoint()).cwiseAbs().maxCoeff() >
        tol::herm * std::max(1.0, max_abs(choi))) {
        throw Error(ErrorCode::InvalidInput, "Choi matrix is not Hermitian");
    }
    return ChannelRep(RepKind::Choi, Mat4((choi + choi.adjoint()) / 2.0));
}

ChannelRep ChannelRep::from_stm(const Mat4 &stm) {
    if (!all_finite(stm)) {
        throw Error(ErrorCode::InvalidInput, "STM has non-finite entries");
    }
    return ChannelRep(RepKind::Stm, stm);
}

ChannelRep ChannelRep::from_ptm(const RealMat4 &ptm) {
    if (!all_finite(ptm)) {
        throw Error(ErrorCode::InvalidInput, "PTM has non-finite entries");
    }
    return ChannelRep(RepKind::Ptm, ptm);
}

ChannelRep ChannelRep::unitary(const Mat2 &u) { return from_kraus(KrausSet({u})); }

ChannelRep ChannelRep::identity() { return from_ptm(RealMat4::Identity()); }

const KrausSet &ChannelRep::kraus() const {
    if (kind_ != RepKind::Kraus) {
        throw Error(ErrorCode::InvalidInput, "channel is not stored as a Kraus set; use convert()");
    }
    return std::get<KrausSet>(payload_);
}

Mat4 ChannelRep::choi() const {
    switch (kind_) {
        case RepKind::Kraus: {
            Mat4 c = Mat4::Zero();
            for (const auto &k : std::get<KrausSet>(payload_).operators()) {
                c += kraus_outer(k);
            }
            return c;
        }
        case RepKind::Choi: return std::get<Mat4>(payload_);
        case RepKind::Stm: return stm_to_choi(std::get<Mat4>(payload_));
        case RepKind::Ptm: return stm_to_choi(ptm_to_stm(std::get<RealMat4>(payload_)));
    }
    return {};
}

Mat4 ChannelRep::stm() const {
    switch (kind_) {
        case RepKind::Kraus: return kraus_to_stm(std::get<KrausSet>(payload_).operators());
        case RepKind::Choi: return choi_to_stm(std::get<Mat4>(payload_));
        case RepKind::Stm: return std::get<Mat4>(payload_);
        case RepKind::Ptm: return ptm_to_stm(std::get<RealMat4>(payload_));
    }
    return {};
}

RealMat4 ChannelRep::ptm() const {
    if (kind_ == RepKind::Ptm) {
        return std::get<RealMat4>(payload_);
    }
    return stm_to_ptm(stm());
}

ChannelRep kraus_to_choi(const KrausSet &k) { return ChannelRep::from_choi(ChannelRep::from_kraus(k).choi()); }

ChannelRep convert(const ChannelRep &rep, RepKind target) {
    if (rep.kind() == target) {
        return rep;
    }
    switch (target) {
        case RepKind::Kraus: {
            Mat4 c = rep.choi();
            auto ops = choi_kraus_operators(c);
            Mat2 g = kraus_gram(c);
            if ((g - Mat2::Identity()).cwiseAbs().maxCoeff() <= tol::trace) {
                return ChannelRep::from_kraus(KrausSet(std::move(ops)));
            }
            double bound = hermitian_eigen(g).values(0);
            return ChannelRep::from_kraus(
                KrausSet(std::move(ops), Completeness::SubNormalized, bound));
        }
        case RepKind::Choi: return ChannelRep::from_choi(rep.choi());
        case RepKind::Stm: return ChannelRep::from_stm(rep.stm());
        case RepKind::Ptm: return ChannelRep::from_ptm(rep.ptm());
    }
    return rep;
}

ChannelRep compose(const ChannelRep &a, const ChannelRep &b) {
    return ChannelRep::from_stm(a.stm() * b.stm());
}

Mat2 apply_linear(const ChannelRep &rep, const Mat2 &x) {
    if (rep.kind() == RepKind::Kraus) {
        Mat2 out = Mat2::Zero();
        for (const auto &k : rep.kraus().operators()) {
            out += k * x * k.adjoint();
        }
        return out;
    }
    Eigen::Vector4cd v;
    for (int k = 0; k < 4; ++k) v(k) = x(k / 2, k % 2);
    Eigen::Vector4cd w = rep.stm() * v;
    Mat2 out;
    for (int k = 0; k < 4; ++k) out(k / 2, k % 2) = w(k);
    return out;
}

DensityMatrix apply(const ChannelRep &rep, const DensityMatrix &rho) {
    return DensityMatrix::from_matrix(apply_linear(rep, rho.matrix()));
}

CPTPReport check_cptp(const ChannelRep &rep, double tolerance) {
    CPTPReport report;
    Mat4 c = rep.choi();
    report.hermiticity_residual = (c - c.adjoint()).cwiseAbs().maxCoeff();
    report.min_choi_eigenvalue = hermitian_eigen(c).values(3);
    report.tp_residual = (trace_output(c) - Mat2::Identity()).cwiseAbs().maxCoeff();
    report.cp = report.min_choi_eigenvalue >= -tolerance && report.hermiticity_residual <= tolerance;
    report.tp = report.tp_residual <= tolerance;
    return report;
}

}  // namespace qemsense
