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

#ifndef QEMSENSE_QMATRIX_HPP
#define QEMSENSE_QMATRIX_HPP

#include <array>
#include <complex>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qemsense/errors.hpp"

// Single-qubit channel algebra.
//
// Conventions used throughout the library:
//   * matrix units c_k = |a><b| with k = 2a + b (row-major vectorisation);
//   * STM  S[i][j] = Tr[c_i^dag M(c_j)], so vec(M(rho)) = S vec(rho);
//   * PTM  P[i][j] = Tr[s_i M(s_j)] / 2 with s = (I, X, Y, Z), real for
//     Hermiticity-preserving maps, first row (1,0,0,0) for trace-preserving ones;
//   * Choi C = sum_k c_k (x) M(c_k), i.e. C[2a+r][2b+c] = M(|a><b|)[r][c].
namespace qemsense {

using Complex = std::complex<double>;
using Mat2 = Eigen::Matrix2cd;
using Mat4 = Eigen::Matrix4cd;
using RealMat3 = Eigen::Matrix3d;
using RealMat4 = Eigen::Matrix4d;
using Vec3 = Eigen::Vector3d;

namespace tol {
inline constexpr double herm = 1e-10;
inline constexpr double trace = 1e-10;
inline constexpr double psd = 1e-10;
}  // namespace tol

enum class PauliAxis { X = 1, Y = 2, Z = 3 };

/// (I, X, Y, Z).
const std::array<Mat2, 4> &pauli();
Mat2 matrix_unit(int k);

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived> &m) {
    return m.array().isFinite().all();
}

double max_abs(const Mat4 &m);
double max_abs(const RealMat4 &m);

/// Axis-angle rotation of the Bloch sphere; the associated unitary is
/// exp(-i angle/2 n.sigma).
struct Rotation {
    Vec3 axis = Vec3::UnitZ();
    double angle = 0.0;

    static Rotation identity() { return {}; }
    static Rotation about(PauliAxis axis, double angle);
    static Rotation from_so3(const RealMat3 &r);

    Mat2 unitary() const;
    RealMat3 so3() const;
    Rotation inverse() const { return {axis, -angle}; }
};

struct HermitianEigen2 {
    Eigen::Vector2d values;  // descending
    Mat2 vectors;
};

struct HermitianEigen4 {
    Eigen::Vector4d values;  // descending
    Mat4 vectors;
};

/// Eigendecomposition of the Hermitian part (m + m^dag)/2. Eigenvalues are
/// sorted in descending order; eigenvectors of (numerically) degenerate
/// eigenvalues are re-orthonormalised in index order and each vector's phase is
/// fixed so that its largest component is real and positive.
HermitianEigen2 hermitian_eigen(const Mat2 &m);
HermitianEigen4 hermitian_eigen(const Mat4 &m);

/// Principal square root of a Hermitian PSD 2x2 matrix; eigenvalues within
/// -tol::psd of zero are clamped.
Mat2 psd_sqrt(const Mat2 &m);

class DensityMatrix {
  public:
    static DensityMatrix from_matrix(const Mat2 &m);
    static DensityMatrix from_bloch(const Vec3 &r);

    const Mat2 &matrix() const { return m_; }
    double expectation(PauliAxis axis) const;
    Vec3 bloch() const;

  private:
    explicit DensityMatrix(const Mat2 &m) : m_(m) {}
    Mat2 m_;
};

enum class Completeness { TracePreserving, SubNormalized };

class KrausSet {
  public:
    explicit KrausSet(std::vector<Mat2> ops,
                      Completeness completeness = Completeness::TracePreserving,
                      double bound = 1.0, double tolerance = 1e-10);

    const std::vector<Mat2> &operators() const { return ops_; }
    Completeness completeness() const { return completeness_; }
    double bound() const { return bound_; }
    std::size_t size() const { return ops_.size(); }

    /// sum_j K_j^dag K_j
    Mat2 gram() const;

  private:
    std::vector<Mat2> ops_;
    Completeness completeness_;
    double bound_;
};

enum class RepKind { Kraus, Choi, Stm, Ptm };

class ChannelRep {
  public:
    static ChannelRep from_kraus(KrausSet k);
    static ChannelRep from_choi(const Mat4 &choi);
    static ChannelRep from_stm(const Mat4 &stm);
    static ChannelRep from_ptm(const RealMat4 &ptm);
    static ChannelRep unitary(const Mat2 &u);
    static ChannelRep identity();

    RepKind kind() const { return kind_; }

    const KrausSet &kraus() const;
    Mat4 choi() const;
    Mat4 stm() const;
    RealMat4 ptm() const;

  private:
    ChannelRep(RepKind kind, std::variant<KrausSet, Mat4, RealMat4> payload)
        : kind_(kind), payload_(std::move(payload)) {}

    RepKind kind_;
    std::variant<KrausSet, Mat4, RealMat4> payload_;
};

// Raw representation changes.
Mat4 kraus_to_stm(const std::vector<Mat2> &ops);
Mat4 stm_to_choi(const Mat4 &stm);
Mat4 choi_to_stm(const Mat4 &choi);
RealMat4 stm_to_ptm(const Mat4 &stm);
Mat4 ptm_to_stm(const RealMat4 &ptm);

/// Choi matrix of a single Kraus operator, |K>><<K| with |K>>[2a+r] = K[r][a].
Mat4 kraus_outer(const Mat2 &k);

/// Kraus operators from a PSD Choi matrix. Eigenvalues below tol::psd in
/// magnitude are dropped; anything more negative raises NotCompletelyPositive.
std::vector<Mat2> choi_kraus_operators(const Mat4 &choi, double tolerance = tol::psd);

/// Partial trace of the Choi matrix over the output factor. For a CP map this
/// equals (sum_j K_j^dag K_j)^T, so TP maps give the identity.
Mat2 trace_output(const Mat4 &choi);

/// sum_j K_j^dag K_j computed from a Choi matrix.
Mat2 kraus_gram(const Mat4 &choi);

ChannelRep kraus_to_choi(const KrausSet &k);
ChannelRep convert(const ChannelRep &rep, RepKind target);

/// a after b.
ChannelRep compose(const ChannelRep &a, const ChannelRep &b);

/// Linear action on an arbitrary 2x2 operator; valid for non-CP maps too.
Mat2 apply_linear(const ChannelRep &rep, const Mat2 &x);
DensityMatrix apply(const ChannelRep &rep, const DensityMatrix &rho);

struct CPTPReport {
    double min_choi_eigenvalue = 0.0;
    double tp_residual = 0.0;           // max |Tr_out[C] - I|
    double hermiticity_residual = 0.0;  // max |C - C^dag|
    bool cp = false;
    bool tp = false;

    bool cptp() const { return cp && tp; }
};

CPTPReport check_cptp(const ChannelRep &rep, double tolerance = tol::psd);

}  // namespace qemsense

#endif
