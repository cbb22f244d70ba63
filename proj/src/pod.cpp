#include "romkit/pod.hpp"

#include "romkit/error.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace romkit {

SnapshotSet compute_snapshots(const AffineProblem& problem, const ParameterSet& parameters)
{
  if (parameters.empty())
    throw ConfigError("snapshot set needs at least one parameter");
  const auto solutions = solve_fom_batch(problem, parameters);
  SnapshotSet set;
  set.parameters = parameters;
  set.vectors.resize(problem.n_dofs(), static_cast<Eigen::Index>(parameters.size()));
  for (std::size_t m = 0; m < solutions.size(); ++m) {
    set.vectors.col(static_cast<Eigen::Index>(m)) = solutions[m].u;
    set.solve_residuals.push_back(solutions[m].solve_residual);
  }
  return set;
}

namespace {

template <typename S>
struct SpectrumT
{
  Vec<S> values;
  Mat<S> vectors;
  Eigen::Index rank = 0;
};

template <typename S>
SpectrumT<S> descending_spectrum(const Mat<S>& correlation)
{
  using std::abs;
  const Eigen::SelfAdjointEigenSolver<Mat<S>> eig(correlation);
  if (eig.info() != Eigen::Success)
    throw NumericalError("eigendecomposition of the correlation matrix failed");
  const Eigen::Index m = correlation.rows();
  SpectrumT<S> s;
  s.values.resize(m);
  s.vectors.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    s.values[i] = eig.eigenvalues()[m - 1 - i];
    s.vectors.col(i) = eig.eigenvectors().col(m - 1 - i);
  }
  const S top = s.values[0] > S(0) ? s.values[0] : S(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (s.values[i] < S(0)) {
      if (-s.values[i] > S(1e-12) * top)
        throw NumericalError("correlation matrix has a significantly negative eigenvalue " +
                             std::to_string(static_cast<double>(s.values[i])));
      s.values[i] = S(0);
    }
    if (s.values[i] > S(1e-12) * top)
      ++s.rank;
  }
  return s;
}

template <typename S>
PodSpectrum to_double(const SpectrumT<S>& s)
{
  PodSpectrum out;
  out.eigenvalues = s.values.template cast<double>();
  out.eigenvectors = s.vectors.template cast<double>();
  out.rank = s.rank;
  return out;
}

template <typename S>
S x_dot(const SpMat<S>& x, const Vec<S>& u, const Vec<S>& v)
{
  return u.dot(x * v);
}

template <typename S>
ReducedBasis build_pod_basis(const AffineProblem& problem, const SnapshotSet& snapshots,
                             const PodCriterion& criterion)
{
  using std::sqrt;
  const SpectrumT<S> spectrum = descending_spectrum<S>(correlation_matrix<S>(problem, snapshots));
  PodSpectrum provenance = to_double(spectrum);
  const Eigen::Index n = select_pod_size(provenance, criterion);
  provenance.retained = n;

  const SpMat<S> x = problem.x.cast<S>();
  const Mat<S> psi = snapshots.vectors.cast<S>();
  const S m = S(static_cast<double>(snapshots.size()));
  Mat<S> xi(problem.n_dofs(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Vec<S> v = psi * spectrum.vectors.col(i) / sqrt(m * spectrum.values[i]);
    const S initial = sqrt(x_dot<S>(x, v, v));
    for (int pass = 0; pass < 2 && i > 0; ++pass) {
      const Vec<S> coefficients = xi.leftCols(i).transpose() * (x * v);
      v -= xi.leftCols(i) * coefficients;
    }
    const S remaining = sqrt(x_dot<S>(x, v, v));
    if (!(remaining > S(1e-10) * initial))
      throw RankError(static_cast<std::size_t>(n), static_cast<std::size_t>(i));
    xi.col(i) = v / remaining;
  }

  ReducedBasis basis(problem.n_dofs());
  for (Eigen::Index i = 0; i < n; ++i)
    basis.append(xi.col(i).template cast<double>());
  basis.provenance = std::move(provenance);
  return basis;
}

} // namespace

template <typename S>
Mat<S> correlation_matrix(const AffineProblem& problem, const SnapshotSet& snapshots)
{
  const Eigen::Index m = snapshots.size();
  if (m < 1)
    throw ConfigError("correlation matrix of an empty snapshot set");
  const Mat<S> psi = snapshots.vectors.cast<S>();
  const Mat<S> xpsi = problem.x.cast<S>() * psi;
  const S scale = S(static_cast<double>(m));
  Mat<S> c(m, m);
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      c(i, j) = psi.col(i).dot(xpsi.col(j)) / scale;
      c(j, i) = c(i, j);
    }
  return c;
}

template <typename S>
PodSpectrum pod_spectrum(const Mat<S>& correlation)
{
  return to_double(descending_spectrum<S>(correlation));
}

template Matrix correlation_matrix<double>(const AffineProblem&, const SnapshotSet&);
template Mat<Quad> correlation_matrix<Quad>(const AffineProblem&, const SnapshotSet&);
template PodSpectrum pod_spectrum<double>(const Matrix&);
template PodSpectrum pod_spectrum<Quad>(const Mat<Quad>&);

Eigen::Index select_pod_size(const PodSpectrum& spectrum, const PodCriterion& criterion)
{
  if (criterion.kind == PodCriterion::Kind::FixedSize) {
    if (criterion.size > spectrum.rank)
      throw RankError(static_cast<std::size_t>(criterion.size), static_cast<std::size_t>(spectrum.rank));
    if (criterion.size < 1)
      throw ConfigError("POD basis size must be at least 1");
    return criterion.size;
  }
  if (!(criterion.epsilon >= 0.0 && criterion.epsilon < 1.0))
    throw ConfigError("retained-energy tolerance must lie in [0, 1)");
  const double total = spectrum.eigenvalues.sum();
  double partial = 0.0;
  for (Eigen::Index n = 1; n <= spectrum.rank; ++n) {
    partial += spectrum.eigenvalues[n - 1];
    if (partial >= (1.0 - criterion.epsilon) * total)
      return n;
  }
  return spectrum.rank;
}

ReducedBasis pod_basis(const AffineProblem& problem, const SnapshotSet& snapshots,
                       const PodCriterion& criterion, PodPrecision precision)
{
  if (precision == PodPrecision::Quad)
    return build_pod_basis<Quad>(problem, snapshots, criterion);
  return build_pod_basis<double>(problem, snapshots, criterion);
}

Projection project_onto_basis(const AffineProblem& problem, const ReducedBasis& basis, const Vector& w)
{
  if (w.size() != problem.n_dofs())
    throw ConfigError("vector length does not match the problem");
  Projection p;
  p.coefficients = basis.vectors().transpose() * (problem.x * w);
  p.projection = basis.vectors() * p.coefficients;
  return p;
}

} // namespace romkit
