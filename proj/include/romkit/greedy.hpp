#pragma once

#include "romkit/certify.hpp"

#include <functional>
#include <optional>
#include <string>

namespace romkit {

struct Orthonormalization
{
  bool accepted = false;
  Vector vector;               // unit X-norm, X-orthogonal to the basis (when accepted)
  double retained_ratio = 0.0; // ||c - P c||_X / ||c||_X
  std::string diagnostic;
};

// Two passes of classical Gram-Schmidt against `basis` in the X inner product,
// then normalization. Rejected iff the projected norm falls below 1e-10 of the
// candidate's norm.
Orthonormalization orthonormalize(const AffineProblem& problem, const Vector& candidate,
                                  const ReducedBasis& basis);

struct GreedyOptions
{
  double tolerance = 1e-6;   // on max_mu eta_en(mu) / ||u_rb(mu)||_V
  int n_max = 40;
  std::optional<ParameterPoint> mu_1;  // defaults to the domain midpoint
  std::function<void(int n, double max_estimator, const ParameterPoint& next)> progress;
};

struct GreedyResult
{
  ReducedBasis basis;  // provenance holds the GreedyHistory
  ReducedModel model;
  ResidualData residual;
  double truth_solve_seconds = 0.0;

  const GreedyHistory& history() const { return std::get<GreedyHistory>(basis.provenance); }
};

// Relative energy estimator used for greedy selection and stopping.
double relative_estimator(const Certificate& cert);

GreedyResult greedy_build(const AffineProblem& problem, const ParameterSet& training_set,
                          const GreedyOptions& options);

} // namespace romkit
