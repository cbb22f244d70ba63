#pragma once

#include "romkit/problem.hpp"

#include <cstdint>
#include <variant>
#include <vector>

namespace romkit {

struct PodSpectrum
{
  Vector eigenvalues;   // descending, clamped at 0
  Matrix eigenvectors;  // columns v_i, orthonormal in R^M
  Eigen::Index rank = 0;
  Eigen::Index retained = 0;
};

enum class StoppingReason { Tolerance, NMax, Stagnation };

const char* to_string(StoppingReason reason);
StoppingReason stopping_reason_from_string(const std::string& s);

struct GreedyHistory
{
  ParameterSet selected_parameters;
  std::vector<double> max_estimator_per_iteration;
  std::vector<std::size_t> selected_training_index;  // index of mu_{n+1} in the training set
  StoppingReason stopping_reason = StoppingReason::NMax;
  std::size_t training_set_size = 0;
};

using BasisProvenance = std::variant<std::monostate, PodSpectrum, GreedyHistory>;

// X-orthonormal vectors xi_1..xi_N stored as matrix columns. Every prefix of
// the basis carries its own fingerprint so nested models can be matched to it.
class ReducedBasis
{
public:
  ReducedBasis() = default;
  explicit ReducedBasis(Eigen::Index n_dofs);

  Eigen::Index size() const { return vectors_.cols(); }
  Eigen::Index n_dofs() const { return vectors_.rows(); }
  const Matrix& vectors() const { return vectors_; }
  auto vector(Eigen::Index i) const { return vectors_.col(i); }

  void append(const Vector& xi);

  // Fingerprint of the first n vectors.
  std::uint64_t fingerprint(Eigen::Index n) const;
  std::uint64_t fingerprint() const { return fingerprint(size()); }

  ReducedBasis truncated(Eigen::Index n) const;

  BasisProvenance provenance;

private:
  Matrix vectors_;
  std::vector<std::uint64_t> prefix_fingerprints_{Fnv1aSeed()};

  static std::uint64_t Fnv1aSeed();
};

// G_ij = xi_i^T X xi_j
Matrix gram_matrix(const AffineProblem& problem, const ReducedBasis& basis);

// max |xi_i^T X xi_j - delta_ij|
double orthonormality_error(const AffineProblem& problem, const ReducedBasis& basis);

} // namespace romkit
