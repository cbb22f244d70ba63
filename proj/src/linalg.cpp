#include "romkit/linalg.hpp"

#include "romkit/error.hpp"

#include <cmath>
#include <limits>

namespace romkit {

Vector residual_extended(const SparseMatrix& a, const Vector& x, const Vector& b)
{
  std::vector<long double> r(static_cast<std::size_t>(b.size()));
  for (Eigen::Index i = 0; i < b.size(); ++i)
    r[static_cast<std::size_t>(i)] = b[i];
  for (Eigen::Index col = 0; col < a.outerSize(); ++col) {
    const long double xc = x[col];
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      r[static_cast<std::size_t>(it.row())] -= static_cast<long double>(it.value()) * xc;
  }
  Vector out(b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i)
    out[i] = static_cast<double>(r[static_cast<std::size_t>(i)]);
  return out;
}

double max_abs(const SparseMatrix& a)
{
  double m = 0.0;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      m = std::max(m, std::abs(it.value()));
  return m;
}

double norm_inf(const SparseMatrix& a)
{
  Vector rows = Vector::Zero(a.rows());
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      rows[it.row()] += std::abs(it.value());
  return rows.size() ? rows.maxCoeff() : 0.0;
}

double asymmetry(const SparseMatrix& a)
{
  if (a.rows() != a.cols())
    return std::numeric_limits<double>::infinity();
  const SparseMatrix diff = a - SparseMatrix(a.transpose());
  return max_abs(diff);
}

SpdSolver::SpdSolver(const SparseMatrix& a) : a_(a)
{
  ldlt_.compute(a_);
  if (ldlt_.info() != Eigen::Success)
    throw NumericalError("sparse LDL^T factorization failed");
  const Vector d = ldlt_.vectorD();
  min_pivot_ = d.size() ? d.minCoeff() : 0.0;
  if (!(min_pivot_ > 0.0))
    throw NumericalError("matrix is not positive definite: smallest pivot " +
                         std::to_string(min_pivot_));
}

Vector SpdSolver::solve(const Vector& b) const
{
  double ignored = 0.0;
  return solve(b, ignored);
}

Vector SpdSolver::solve(const Vector& b, double& relative_residual) const
{
  const double bnorm = b.norm();
  Vector x = ldlt_.solve(b);
  if (bnorm == 0.0) {
    relative_residual = 0.0;
    return x;
  }
  Vector r = residual_extended(a_, x, b);
  relative_residual = r.norm() / bnorm;
  for (int step = 0; step < 4 && relative_residual > 1e-16; ++step) {
    const Vector candidate = x + ldlt_.solve(r);
    const Vector r_new = residual_extended(a_, candidate, b);
    const double rel_new = r_new.norm() / bnorm;
    if (!(rel_new < relative_residual))
      break;
    x = candidate;
    r = r_new;
    relative_residual = rel_new;
  }
  return x;
}

PcgResult pcg(const SparseMatrix& a, const Vector& b, Vector& x, double relative_tolerance,
              int max_iterations)
{
  PcgResult result;
  result.min_curvature = std::numeric_limits<double>::infinity();
  const Vector inv_diag = a.diagonal().cwiseInverse();
  const double bnorm = b.norm();
  const double anorm = norm_inf(a);
  if (bnorm == 0.0) {
    x.setZero();
    result.converged = true;
    return result;
  }
  Vector r = b - a * x;
  Vector z = inv_diag.cwiseProduct(r);
  Vector p = z;
  double rz = r.dot(z);
  auto done = [&] { return r.norm() <= relative_tolerance * (anorm * x.norm() + bnorm); };
  for (int k = 0; k < max_iterations; ++k) {
    result.relative_residual = r.norm() / bnorm;
    if (done()) {
      r = b - a * x;
      result.relative_residual = r.norm() / bnorm;
    }
    if (done()) {
      result.converged = true;
      return result;
    }
    const Vector ap = a * p;
    const double pap = p.dot(ap);
    result.min_curvature = std::min(result.min_curvature, pap / p.squaredNorm());
    if (!(pap > 0.0))
      return result;
    const double step = rz / pap;
    x += step * p;
    r -= step * ap;
    // recompute the true residual now and then to stop drift
    if ((k + 1) % 50 == 0)
      r = b - a * x;
    z = inv_diag.cwiseProduct(r);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
    result.iterations = k + 1;
  }
  r = b - a * x;
  result.relative_residual = r.norm() / bnorm;
  result.converged = done();
  return result;
}

} // namespace romkit
