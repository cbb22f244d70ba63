#pragma once

#include "romkit/basis.hpp"
#include "romkit/quad.hpp"
#include "romkit/truth.hpp"

namespace romkit {

// Truth solutions psi_m = u(mu_m), stored as the columns of `vectors`.
struct SnapshotSet
{
  ParameterSet parameters;
  Matrix vectors;
  std::vector<double> solve_residuals;

  Eigen::Index size() const { return vectors.cols(); }
};

SnapshotSet compute_snapshots(const AffineProblem& problem, const ParameterSet& parameters);

// Arithmetic used for the correlation matrix, its eigenproblem and the
// basis construction. The finished basis is always stored in double.
enum class PodPrecision { Double, Quad };

// C_mq = (1/M) psi_m^T X psi_q, accumulated in S.
template <typename S = double>
Mat<S> correlation_matrix(const AffineProblem& problem, const SnapshotSet& snapshots);

// Eigenpairs of C in descending order. Eigenvalues below zero must be
// round-off (|lambda| <= 1e-12 lambda_1) and are clamped; rank counts
// eigenvalues above 1e-12 lambda_1.
template <typename S>
PodSpectrum pod_spectrum(const Mat<S>& correlation);

struct PodCriterion
{
  enum class Kind { FixedSize, RetainedEnergy };
  Kind kind = Kind::FixedSize;
  Eigen::Index size = 0;   // FixedSize
  double epsilon = 0.0;    // RetainedEnergy: keep at least (1 - epsilon) of the energy

  static PodCriterion fixed(Eigen::Index n) { return {Kind::FixedSize, n, 0.0}; }
  static PodCriterion energy(double epsilon) { return {Kind::RetainedEnergy, 0, epsilon}; }
};

// Smallest N satisfying the criterion; throws RankError past the numerical rank.
Eigen::Index select_pod_size(const PodSpectrum& spectrum, const PodCriterion& criterion);

// xi_i = (M lambda_i)^{-1/2} sum_m (v_i)_m psi_m, followed by a two-pass X
// Gram-Schmidt sweep so the basis is X-orthonormal to working precision.
ReducedBasis pod_basis(const AffineProblem& problem, const SnapshotSet& snapshots,
                       const PodCriterion& criterion, PodPrecision precision = PodPrecision::Quad);

struct Projection
{
  Vector coefficients;  // c_i = xi_i^T X w
  Vector projection;    // sum_i c_i xi_i
};

Projection project_onto_basis(const AffineProblem& problem, const ReducedBasis& basis, const Vector& w);

} // namespace romkit
