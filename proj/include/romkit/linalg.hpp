#pragma once

#include "romkit/types.hpp"

#include <Eigen/SparseCholesky>

#include <memory>
#include <string>

namespace romkit {

// Left-to-right accumulation. Results do not depend on memory alignment, which
// keeps hierarchically extended reduced operators bit-identical to fresh ones.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar sequential_dot(const Eigen::MatrixBase<DerivedA>& a,
                                         const Eigen::MatrixBase<DerivedB>& b)
{
  typename DerivedA::Scalar sum(0);
  for (Eigen::Index i = 0; i < a.size(); ++i)
    sum += a[i] * b[i];
  return sum;
}

// (u, v)_X
inline double inner(const SparseMatrix& x, const Vector& u, const Vector& v)
{
  return u.dot(x * v);
}

// Residual b - A x accumulated in extended precision, rounded once.
Vector residual_extended(const SparseMatrix& a, const Vector& x, const Vector& b);

double max_abs(const SparseMatrix& a);

// max row sum of |a_ij|
double norm_inf(const SparseMatrix& a);

// max |A - A^T|
double asymmetry(const SparseMatrix& a);

// Sparse LDL^T of an SPD matrix with iterative refinement against an
// extended-precision residual.
class SpdSolver
{
public:
  explicit SpdSolver(const SparseMatrix& a);

  Vector solve(const Vector& b) const;
  // Solve and report the final relative residual ||b - A x||_2 / ||b||_2.
  Vector solve(const Vector& b, double& relative_residual) const;

  double min_pivot() const { return min_pivot_; }
  Eigen::Index size() const { return a_.rows(); }
  const SparseMatrix& matrix() const { return a_; }

private:
  SparseMatrix a_;
  Eigen::SimplicialLDLT<SparseMatrix> ldlt_;
  double min_pivot_ = 0.0;
};

struct PcgResult
{
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  // smallest p^T A p / p^T p seen; negative means the matrix is not SPD
  double min_curvature = 0.0;
};

// Jacobi-preconditioned conjugate gradients, x is the initial guess on entry.
// Stops once ||b - A x|| <= tol (||A||_inf ||x|| + ||b||).
PcgResult pcg(const SparseMatrix& a, const Vector& b, Vector& x, double relative_tolerance,
              int max_iterations);

} // namespace romkit
