#include "romkit/truth.hpp"

#include "romkit/error.hpp"
#include "romkit/parallel.hpp"

#include <cmath>
#include <sstream>

namespace romkit {

namespace {

std::string describe(const ParameterPoint& mu)
{
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    os << (i ? ", " : "") << mu[i];
  os << ')';
  return os.str();
}

double checked_quadratic_form(const SparseMatrix& a, const Vector& u)
{
  if (u.size() != a.rows())
    throw ConfigError("vector has length " + std::to_string(u.size()) + ", expected " + std::to_string(a.rows()));
  const double q = u.dot(a * u);
  if (q >= 0.0)
    return q;
  const double scale = u.squaredNorm() * a.diagonal().cwiseAbs().maxCoeff();
  if (q < -1e-14 * scale)
    throw NumericalError("negative quadratic form " + std::to_string(q) +
                         ": operator is not numerically symmetric positive semidefinite");
  return 0.0;
}

} // namespace

TruthSolution solve_fom(const AffineProblem& problem, const ParameterPoint& mu, TruthMethod method)
{
  const ThetaValues theta = eval_thetas(problem.coefficients, mu);
  const SparseMatrix a = problem.operator_at(theta.a);
  const Vector f = problem.load_at(theta.f);

  TruthSolution sol;
  sol.mu = mu;
  sol.out_of_domain = theta.out_of_domain;
  if (method == TruthMethod::Direct) {
    try {
      const SpdSolver solver(a);
      sol.u = solver.solve(f, sol.solve_residual);
    } catch (const NumericalError& e) {
      throw NumericalError("truth solve at mu = " + describe(mu) + " broke down: " + e.what());
    }
  } else {
    sol.u = Vector::Zero(f.size());
    const int max_iterations = static_cast<int>(10 * f.size());
    const PcgResult r = pcg(a, f, sol.u, 1e-12, max_iterations);
    if (!(r.min_curvature > 0.0))
      throw NumericalError("truth solve at mu = " + describe(mu) +
                           " broke down: non-positive curvature " + std::to_string(r.min_curvature));
    if (!r.converged)
      throw NumericalError("truth solve at mu = " + describe(mu) + " did not converge in " +
                           std::to_string(r.iterations) + " iterations (residual " +
                           std::to_string(r.relative_residual) + ")");
  }
  const double residual = residual_extended(a, sol.u, f).norm();
  sol.solve_residual = f.norm() > 0.0 ? residual / f.norm() : 0.0;
  const double denominator = norm_inf(a) * sol.u.norm() + f.norm();
  sol.backward_error = denominator > 0.0 ? residual / denominator : 0.0;
  if (!(sol.backward_error <= 1e-12))
    throw NumericalError("truth solve at mu = " + describe(mu) + " reached only backward error " +
                         std::to_string(sol.backward_error));
  sol.s = sol.u.dot(f);
  return sol;
}

std::vector<TruthSolution> solve_fom_batch(const AffineProblem& problem, const ParameterSet& mus)
{
  std::vector<TruthSolution> out(mus.size());
  parallel_for(mus.size(), [&](std::size_t i) { out[i] = solve_fom(problem, mus[i]); });
  return out;
}

double v_norm(const AffineProblem& problem, const Vector& u)
{
  return std::sqrt(checked_quadratic_form(problem.x, u));
}

double mu_norm(const AffineProblem& problem, const Vector& u, const ParameterPoint& mu)
{
  const ThetaValues theta = eval_thetas(problem.coefficients, mu);
  return std::sqrt(checked_quadratic_form(problem.operator_at(theta.a), u));
}

StabilityOracle::StabilityOracle(const AffineProblem& problem) : coefficients_(&problem.coefficients)
{
  const Eigen::Index n = problem.n_dofs();
  if (n > kMaxDofs)
    throw ConfigError("stability eigensolve refused for N = " + std::to_string(n) + " > " +
                      std::to_string(kMaxDofs) + "; use the sampled min-theta bounds instead");
  const Eigen::LLT<Matrix> llt(Matrix(problem.x));
  if (llt.info() != Eigen::Success)
    throw NumericalError("dense Cholesky of X failed");
  const auto l = llt.matrixL();
  blocks_.reserve(problem.a.size());
  for (const auto& a : problem.a) {
    Matrix t = l.solve(Matrix(a));                     // L^{-1} A
    Matrix m = l.solve(t.transpose());                 // L^{-1} A L^{-T}
    blocks_.push_back(0.5 * (m + m.transpose()));
  }
}

StabilityConstants StabilityOracle::operator()(const ParameterPoint& mu) const
{
  const ThetaValues theta = eval_thetas(*coefficients_, mu);
  Matrix c = theta.a[0] * blocks_[0];
  for (std::size_t q = 1; q < blocks_.size(); ++q)
    c.noalias() += theta.a[static_cast<Eigen::Index>(q)] * blocks_[q];
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(c, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success)
    throw NumericalError("generalized eigensolve did not converge");
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff()};
}

StabilityConstants stability_constants(const AffineProblem& problem, const ParameterPoint& mu)
{
  return StabilityOracle(problem)(mu);
}

} // namespace romkit
