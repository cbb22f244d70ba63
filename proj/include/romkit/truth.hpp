#pragma once

#include "romkit/problem.hpp"

#include <vector>

namespace romkit {

struct TruthSolution
{
  ParameterPoint mu;
  Vector u;
  double s = 0.0;               // u^T f(mu)
  double solve_residual = 0.0;  // ||A u - f||_2 / ||f||_2
  // ||A u - f||_2 / (||A||_inf ||u||_2 + ||f||_2), the quantity the solver drives to 1e-12
  double backward_error = 0.0;
  bool out_of_domain = false;
};

enum class TruthMethod
{
  Direct,  // sparse LDL^T with extended-precision refinement
  Pcg,     // Jacobi-preconditioned CG, at most 10 N iterations
};

TruthSolution solve_fom(const AffineProblem& problem, const ParameterPoint& mu,
                        TruthMethod method = TruthMethod::Direct);

// Solves a batch; results are ordered like the input.
std::vector<TruthSolution> solve_fom_batch(const AffineProblem& problem, const ParameterSet& mus);

double v_norm(const AffineProblem& problem, const Vector& u);
double mu_norm(const AffineProblem& problem, const Vector& u, const ParameterPoint& mu);

struct StabilityConstants
{
  double alpha_delta = 0.0;
  double gamma_delta = 0.0;
};

// Extreme generalized eigenvalues of (A(mu), X) by a dense symmetric eigensolve.
// The constructor factors X = L L^T once and forms L^{-1} A_q L^{-T}; each query
// only combines those and computes the spectrum.
class StabilityOracle
{
public:
  static constexpr Eigen::Index kMaxDofs = 5000;

  explicit StabilityOracle(const AffineProblem& problem);

  StabilityConstants operator()(const ParameterPoint& mu) const;

private:
  const AffineCoefficients* coefficients_;
  std::vector<Matrix> blocks_;
};

StabilityConstants stability_constants(const AffineProblem& problem, const ParameterPoint& mu);

} // namespace romkit
