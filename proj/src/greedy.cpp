#include "romkit/greedy.hpp"

#include "romkit/error.hpp"
#include "romkit/parallel.hpp"

#include <chrono>
#include <cmath>
#include <limits>

namespace romkit {

Orthonormalization orthonormalize(const AffineProblem& problem, const Vector& candidate,
                                  const ReducedBasis& basis)
{
  if (candidate.size() != problem.n_dofs())
    throw ConfigError("candidate vector has the wrong length");
  Orthonormalization out;
  const double initial = std::sqrt(std::max(candidate.dot(problem.x * candidate), 0.0));
  if (initial == 0.0) {
    out.diagnostic = "candidate has zero X-norm";
    return out;
  }
  Vector v = candidate;
  for (int pass = 0; pass < 2 && basis.size() > 0; ++pass) {
    const Vector coefficients = basis.vectors().transpose() * (problem.x * v);
    v -= basis.vectors() * coefficients;
  }
  const double remaining = std::sqrt(std::max(v.dot(problem.x * v), 0.0));
  out.retained_ratio = remaining / initial;
  if (remaining < 1e-10 * initial) {
    out.diagnostic = "candidate is linearly dependent on the basis (retained ratio " +
                     std::to_string(out.retained_ratio) + ")";
    return out;
  }
  out.accepted = true;
  out.vector = v / remaining;
  return out;
}

double relative_estimator(const Certificate& cert)
{
  if (cert.u_rb_norm > 0.0)
    return cert.eta_en / cert.u_rb_norm;
  return cert.eta_en == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

GreedyResult greedy_build(const AffineProblem& problem, const ParameterSet& training_set,
                          const GreedyOptions& options)
{
  if (training_set.empty())
    throw ConfigError("greedy training set is empty");
  if (!(options.tolerance > 0.0))
    throw ConfigError("greedy tolerance must be positive");
  if (options.n_max < 1)
    throw ConfigError("greedy n_max must be at least 1");
  if (!problem.coefficients.min_theta_valid)
    throw ConfigError("greedy selection needs a rigorous coercivity lower bound, which this problem "
                      "does not admit; build the basis with POD instead");

  GreedyHistory history;
  history.training_set_size = training_set.size();
  ReducedBasis basis(problem.n_dofs());
  ReducedModel model = empty_model(problem);
  ResidualBuilder residual(problem);

  ParameterPoint next = options.mu_1 ? *options.mu_1 : problem.coefficients.domain.midpoint();
  std::vector<double> estimates(training_set.size());
  double truth_seconds = 0.0;
  for (;;) {
    const auto start = std::chrono::steady_clock::now();
    const TruthSolution truth = solve_fom(problem, next);
    truth_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const Orthonormalization candidate = orthonormalize(problem, truth.u, basis);
    if (!candidate.accepted) {
      history.stopping_reason = StoppingReason::Stagnation;
      break;
    }
    model = extend_projection(model, problem, basis, candidate.vector);
    residual.extend(basis, candidate.vector);
    basis.append(candidate.vector);
    history.selected_parameters.push_back(next);

    const ResidualData& data = residual.data();
    parallel_for(training_set.size(), [&](std::size_t i) {
      estimates[i] = relative_estimator(certificate(model, data, training_set[i]));
    });
    std::size_t best = 0;
    for (std::size_t i = 1; i < estimates.size(); ++i)
      if (estimates[i] > estimates[best] * (1.0 + 1e-15))
        best = i;
    const double max_estimate = estimates[best];
    history.max_estimator_per_iteration.push_back(max_estimate);
    history.selected_training_index.push_back(best);
    next = training_set[best];
    if (options.progress)
      options.progress(static_cast<int>(basis.size()), max_estimate, next);

    if (max_estimate <= options.tolerance) {
      history.stopping_reason = StoppingReason::Tolerance;
      break;
    }
    if (basis.size() >= options.n_max) {
      history.stopping_reason = StoppingReason::NMax;
      break;
    }
  }

  GreedyResult result;
  basis.provenance = std::move(history);
  result.basis = std::move(basis);
  result.model = std::move(model);
  result.residual = residual.data();
  result.truth_solve_seconds = truth_seconds;
  return result;
}

} // namespace romkit
