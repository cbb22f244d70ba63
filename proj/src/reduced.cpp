#include "romkit/reduced.hpp"

#include "romkit/error.hpp"
#include "romkit/fnv.hpp"
#include "romkit/linalg.hpp"

#include <cmath>
#include <sstream>

namespace romkit {

ReducedModel ReducedModel::truncated(Eigen::Index n, std::uint64_t basis_prefix_fingerprint) const
{
  if (n < 0 || n > size())
    throw ConfigError("cannot truncate a reduced model of size " + std::to_string(size()) + " to " +
                      std::to_string(n));
  ReducedModel out;
  for (const auto& a : a_rb)
    out.a_rb.push_back(a.topLeftCorner(n, n));
  for (const auto& f : f_rb)
    out.f_rb.push_back(f.head(n));
  out.coefficients = coefficients;
  out.problem_fingerprint = problem_fingerprint;
  out.basis_fingerprint = basis_prefix_fingerprint;
  return out;
}

ReducedModel empty_model(const AffineProblem& problem)
{
  ReducedModel model;
  model.a_rb.assign(problem.a.size(), Matrix(0, 0));
  model.f_rb.assign(problem.f.size(), Vector(0));
  model.coefficients = problem.coefficients;
  model.problem_fingerprint = problem.fingerprint;
  model.basis_fingerprint = Fnv1a::kOffset;
  return model;
}

ReducedModel extend_projection(const ReducedModel& model, const AffineProblem& problem,
                               const ReducedBasis& basis, const Vector& xi)
{
  const Eigen::Index n = model.size();
  if (model.problem_fingerprint != problem.fingerprint)
    throw ConfigError("reduced model was built for a different problem");
  if (basis.size() < n || basis.fingerprint(n) != model.basis_fingerprint)
    throw ConfigError("reduced model does not match the first " + std::to_string(n) +
                      " basis vectors (fingerprint mismatch)");
  if (xi.size() != problem.n_dofs())
    throw ConfigError("new basis vector has the wrong length");

  ReducedModel out;
  out.coefficients = model.coefficients;
  out.problem_fingerprint = model.problem_fingerprint;
  out.basis_fingerprint =
      Fnv1a(model.basis_fingerprint).update(xi.data(), static_cast<std::size_t>(xi.size()) * sizeof(double)).digest();

  for (std::size_t q = 0; q < problem.a.size(); ++q) {
    const SparseMatrix& a = problem.a[q];
    const Vector a_new = a * xi;
    Matrix grown(n + 1, n + 1);
    grown.topLeftCorner(n, n) = model.a_rb[q];
    for (Eigen::Index m = 0; m < n; ++m) {
      const Vector a_old = a * basis.vector(m);
      const double upper = sequential_dot(basis.vector(m), a_new);
      const double lower = sequential_dot(xi, a_old);
      const double scale = basis.vector(m).norm() * a_new.norm();
      if (std::abs(upper - lower) > 1e-12 * scale)
        throw NumericalError("reduced operator " + std::to_string(q) + " is not symmetric");
      grown(m, n) = grown(n, m) = 0.5 * (upper + lower);
    }
    grown(n, n) = sequential_dot(xi, a_new);
    out.a_rb.push_back(std::move(grown));
  }
  for (std::size_t q = 0; q < problem.f.size(); ++q) {
    Vector grown(n + 1);
    grown.head(n) = model.f_rb[q];
    grown[n] = sequential_dot(xi, problem.f[q]);
    out.f_rb.push_back(std::move(grown));
  }
  return out;
}

ReducedModel project(const AffineProblem& problem, const ReducedBasis& basis)
{
  if (basis.n_dofs() != problem.n_dofs())
    throw ConfigError("dimension mismatch: basis vectors have length " + std::to_string(basis.n_dofs()) +
                      ", problem has " + std::to_string(problem.n_dofs()) + " dofs");
  ReducedModel model = empty_model(problem);
  for (Eigen::Index i = 0; i < basis.size(); ++i)
    model = extend_projection(model, problem, basis, basis.vector(i));
  return model;
}

RBSolution rb_solve(const ReducedModel& model, const ParameterPoint& mu)
{
  const Eigen::Index n = model.size();
  if (n < 1)
    throw ConfigError("reduced solve needs N >= 1");
  const ThetaValues theta = eval_thetas(model.coefficients, mu);
  Matrix a = theta.a[0] * model.a_rb[0];
  for (std::size_t q = 1; q < model.a_rb.size(); ++q)
    a.noalias() += theta.a[static_cast<Eigen::Index>(q)] * model.a_rb[q];
  Vector f = theta.f[0] * model.f_rb[0];
  for (std::size_t q = 1; q < model.f_rb.size(); ++q)
    f.noalias() += theta.f[static_cast<Eigen::Index>(q)] * model.f_rb[q];

  const Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    std::ostringstream os;
    os << "reduced system is not positive definite at theta_a = (" << theta.a.transpose() << ")";
    throw NumericalError(os.str());
  }
  RBSolution sol;
  sol.mu = mu;
  sol.out_of_domain = theta.out_of_domain;
  sol.coefficients = llt.solve(f);
  if (!sol.coefficients.allFinite())
    throw NumericalError("reduced solve produced non-finite coefficients");
  sol.s_rb = sol.coefficients.dot(f);
  return sol;
}

Vector lift(const ReducedBasis& basis, const Vector& coefficients)
{
  if (coefficients.size() != basis.size())
    throw ConfigError("lift: " + std::to_string(coefficients.size()) + " coefficients for a basis of size " +
                      std::to_string(basis.size()));
  return basis.vectors() * coefficients;
}

} // namespace romkit
