#pragma once

#include "romkit/basis.hpp"

#include <cstdint>

namespace romkit {

// Parameter-independent reduced blocks  (A_q)_rb = Xi^T A_q Xi,  (f_q)_rb = Xi^T f_q.
// Holds nothing of size N_delta.
struct ReducedModel
{
  std::vector<Matrix> a_rb;
  std::vector<Vector> f_rb;
  AffineCoefficients coefficients;
  std::uint64_t problem_fingerprint = 0;
  std::uint64_t basis_fingerprint = 0;

  Eigen::Index size() const { return a_rb.empty() ? 0 : a_rb.front().rows(); }
  int q_a() const { return static_cast<int>(a_rb.size()); }
  int q_f() const { return static_cast<int>(f_rb.size()); }
  int num_params() const { return coefficients.num_params(); }

  // Leading n x n blocks: the model of the first n basis vectors.
  ReducedModel truncated(Eigen::Index n, std::uint64_t basis_prefix_fingerprint) const;
};

struct RBSolution
{
  ParameterPoint mu;
  Vector coefficients;
  double s_rb = 0.0;
  bool out_of_domain = false;
};

// Model with N = 0, ready for hierarchical extension.
ReducedModel empty_model(const AffineProblem& problem);

ReducedModel project(const AffineProblem& problem, const ReducedBasis& basis);

// Appends xi_{N+1} to a model built on the first N vectors of `basis`. The
// result is bit-identical to project() on the extended basis.
ReducedModel extend_projection(const ReducedModel& model, const AffineProblem& problem,
                               const ReducedBasis& basis, const Vector& xi);

// Online solve. Cost O(Q_a N^2 + N^3), independent of N_delta.
RBSolution rb_solve(const ReducedModel& model, const ParameterPoint& mu);

Vector lift(const ReducedBasis& basis, const Vector& coefficients);

} // namespace romkit
