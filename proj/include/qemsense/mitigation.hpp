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

#ifndef QEMSENSE_MITIGATION_HPP
#define QEMSENSE_MITIGATION_HPP

#include <array>
#include <vector>

#include "qemsense/qmatrix.hpp"

// Quasi-probabilistic realisation of a trace-preserving, Hermiticity-preserving
// (but generally not completely positive) single-qubit map M:
//
//   M = (1 + p) M_plus - p M_minus,      M_plus, M_minus CPTP,
//   M_pm = (M_pm,1 + M_pm,2) / 2,        M_pm,j extremal,
//
// and each extremal map is realised by at most two Kraus operators in a
// trigonometric normal form sandwiched between two Bloch-sphere rotations.
namespace qemsense {

/// Eigenvalues of the Choi matrix with magnitude below this are assigned to
/// neither the positive nor the negative part.
inline constexpr double kEigenvalueCutoff = 1e-11;

/// A trace-preserving Hermiticity-preserving map, stored as a real PTM whose
/// first row is exactly (1, 0, 0, 0). Complete positivity is not required.
class GeneralMap {
  public:
    static GeneralMap from_ptm(const RealMat4 &ptm, double tolerance = 1e-10);
    static GeneralMap identity() { return GeneralMap(RealMat4::Identity()); }

    const RealMat4 &ptm() const { return ptm_; }
    Mat4 choi() const { return stm_to_choi(ptm_to_stm(ptm_)); }
    ChannelRep rep() const { return ChannelRep::from_ptm(ptm_); }

  private:
    explicit GeneralMap(const RealMat4 &ptm) : ptm_(ptm) {}
    RealMat4 ptm_;
};

/// Condition number of the noise STM (largest over smallest singular value).
double stm_condition_number(const ChannelRep &noise);

/// E^-1 for a trace-preserving noise channel. Throws NotInvertible when
/// |det STM| < 1e-12.
GeneralMap invert_channel(const ChannelRep &noise);

struct EigenPair {
    double value;
    Eigen::Vector4cd vector;
};

struct SignedDecomposition {
    Mat4 choi_plus;
    Mat4 choi_minus;
    std::vector<EigenPair> eigenpairs;  // descending
};

SignedDecomposition wittstock_paulsen(const GeneralMap &m);

/// Smallest p with sum_j K_j,-^dag K_j,- <= p I.
double overhead_bound(const SignedDecomposition &sd);

/// Hermitian PSD D with D^dag D = p I - sum_j K_j,-^dag K_j,-.
Mat2 completion_operator(const SignedDecomposition &sd, double p);

/// Convenience: overhead_bound(wittstock_paulsen(m)).
double overhead(const GeneralMap &m);

struct CptpPair {
    ChannelRep m_plus;
    ChannelRep m_minus;  // identity placeholder when p == 0
    double p;
    Mat2 d_op;
};

CptpPair cptp_pair(const GeneralMap &m);

/// Choi's criterion: the products {K_i^dag K_j} of a minimal Kraus set are
/// linearly independent.
bool is_extremal(const ChannelRep &c, double tolerance = 1e-8);

/// Splits a CPTP map into one (already extremal) or two extremal maps that
/// average to it, via the contraction in the block form of the adjoint map's
/// Choi matrix.
std::vector<ChannelRep> extremal_split(const ChannelRep &c);

/// K_A, K_B of the trigonometric normal form.
std::array<Mat2, 2> trigonometric_kraus(double nu, double mu);

/// PTM of the trigonometric normal form.
RealMat4 trigonometric_ptm(double nu, double mu);

struct ExtremalRealization {
    Rotation pre_rotation;   // applied first
    Rotation post_rotation;  // applied last
    double nu = 0.0;         // [0, pi)
    double mu = 0.0;         // [0, 2 pi)
    KrausSet kraus{{Mat2::Identity()}};  // {K_A} or {K_A, K_B} in normal form
    bool needs_ancilla = false;

    static ExtremalRealization from_angles(double nu, double mu,
                                           const Rotation &pre = Rotation::identity(),
                                           const Rotation &post = Rotation::identity());
    static ExtremalRealization from_unitary(const Mat2 &u);

    /// Kraus operators of the full map, post * K * pre.
    std::vector<Mat2> channel_kraus() const;
    ChannelRep channel() const;
    RealMat4 ptm() const;
};

/// Throws NotExtremal when the map cannot be brought to the normal form
/// within 1e-8.
ExtremalRealization realize_extremal(const ChannelRep &e);

enum class CircuitSign { Plus, Minus };

struct MitigationCircuit {
    CircuitSign sign;
    double weight;          // (1+p)/2, p/2, or the merged (1+p), p
    double shot_fraction;   // weight / (2p + 1)
    ExtremalRealization realization;

    double signed_weight() const { return sign == CircuitSign::Plus ? weight : -weight; }
};

struct MitigationPlan {
    std::vector<MitigationCircuit> circuits;
    double p = 0.0;
    RealMat4 target_ptm = RealMat4::Identity();

    RealMat4 weighted_ptm() const;
    double reconstruction_error() const;
    std::size_t plus_count() const;
    std::size_t minus_count() const;
};

/// Plan from explicit realisations; weights are split evenly inside each sign.
MitigationPlan assemble_plan(double p, const std::vector<ExtremalRealization> &plus,
                             const std::vector<ExtremalRealization> &minus,
                             const RealMat4 &target_ptm);

MitigationPlan build_plan(const GeneralMap &m);

/// The plan realising U M U^dag given a plan for M.
MitigationPlan conjugate_plan(const MitigationPlan &plan, const Rotation &rotation);

struct OptimizeOptions {
    PauliAxis axis = PauliAxis::Z;
    bool refine = false;
    int max_refine_iterations = 400;
};

struct OptimizedMitigation {
    GeneralMap map = GeneralMap::identity();
    MitigationPlan plan;
    double p = 0.0;
    double p_inverse = 0.0;
    int candidate_index = 0;  // 0 is E^-1 itself
};

/// Candidate maps sharing the observable row of E^-1 (E^-1 first).
std::vector<GeneralMap> mitigation_candidates(const GeneralMap &inverse, PauliAxis axis);

OptimizedMitigation optimize_mitigation_map(const ChannelRep &noise,
                                            const OptimizeOptions &options = {});

}  // namespace qemsense

#endif
