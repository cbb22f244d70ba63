#include "romkit/certify.hpp"

#include "romkit/error.hpp"
#include "romkit/fnv.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace romkit {

Matrix ResidualData::gram() const
{
  const Eigen::Index k = representer_count();
  Matrix g(k, k);
  g.topLeftCorner(q_f, q_f) = g_ff;
  g.topRightCorner(q_f, k - q_f) = g_fa;
  g.bottomLeftCorner(k - q_f, q_f) = g_fa.transpose();
  g.bottomRightCorner(k - q_f, k - q_f) = g_aa;
  return g;
}

ResidualData ResidualData::truncated(Eigen::Index n_new, std::uint64_t basis_prefix_fingerprint) const
{
  if (n_new < 0 || n_new > n)
    throw ConfigError("cannot truncate residual data of size " + std::to_string(n) + " to " +
                      std::to_string(n_new));
  ResidualData out;
  out.q_a = q_a;
  out.q_f = q_f;
  out.n = n_new;
  const Eigen::Index ka = q_a * n_new;
  out.g_ff = g_ff;
  out.g_fa = g_fa.leftCols(ka);
  out.g_aa = g_aa.topLeftCorner(ka, ka);
  out.factor = factor.topLeftCorner(q_f + ka, q_f + ka);
  out.problem_fingerprint = problem_fingerprint;
  out.basis_fingerprint = basis_prefix_fingerprint;
  return out;
}

ResidualBuilder::ResidualBuilder(const AffineProblem& problem) : problem_(&problem)
{
  const Eigen::Index nd = problem.n_dofs();
  representers_.resize(nd, 0);
  x_representers_.resize(nd, 0);
  orthonormal_.resize(nd, 0);
  x_orthonormal_.resize(nd, 0);
  data_.q_a = problem.q_a();
  data_.q_f = problem.q_f();
  data_.problem_fingerprint = problem.fingerprint;
  data_.basis_fingerprint = Fnv1a::kOffset;
  for (const auto& f : problem.f) {
    const Vector c = problem.x_solver->solve(f);
    add_representer(c, problem.x * c);
  }
}

void ResidualBuilder::add_representer(const Vector& r, const Vector& xr)
{
  const Eigen::Index k = representers_.cols();
  representers_.conservativeResize(Eigen::NoChange, k + 1);
  x_representers_.conservativeResize(Eigen::NoChange, k + 1);
  representers_.col(k) = r;
  x_representers_.col(k) = xr;

  gram_.conservativeResize(k + 1, k + 1);
  for (Eigen::Index j = 0; j < k; ++j)
    gram_(j, k) = gram_(k, j) = representers_.col(j).dot(xr);
  gram_(k, k) = r.dot(xr);

  // Two passes of modified Gram-Schmidt in the X inner product.
  Vector v = r;
  Vector xv = xr;
  Vector column = Vector::Zero(k + 1);
  for (int pass = 0; pass < 2; ++pass) {
    for (Eigen::Index j = 0; j < k; ++j) {
      if (data_.factor(j, j) == 0.0)
        continue;
      const double t = orthonormal_.col(j).dot(xv);
      v -= t * orthonormal_.col(j);
      xv -= t * x_orthonormal_.col(j);
      column[j] += t;
    }
    xv = problem_->x * v;
  }
  const double norm = std::sqrt(std::max(v.dot(xv), 0.0));
  orthonormal_.conservativeResize(Eigen::NoChange, k + 1);
  x_orthonormal_.conservativeResize(Eigen::NoChange, k + 1);
  if (norm > 1e-13 * std::sqrt(std::max(gram_(k, k), 0.0))) {
    column[k] = norm;
    orthonormal_.col(k) = v / norm;
    x_orthonormal_.col(k) = xv / norm;
  } else {
    column[k] = 0.0;
    orthonormal_.col(k).setZero();
    x_orthonormal_.col(k).setZero();
  }
  data_.factor.conservativeResize(k + 1, k + 1);
  data_.factor.row(k).setZero();
  data_.factor.col(k) = column;

  const Eigen::Index qf = data_.q_f;
  if (k + 1 >= qf) {
    data_.g_ff = gram_.topLeftCorner(qf, qf);
    data_.g_fa = gram_.topRightCorner(qf, k + 1 - qf);
    data_.g_aa = gram_.bottomRightCorner(k + 1 - qf, k + 1 - qf);
  }
}

void ResidualBuilder::extend(const ReducedBasis& basis, const Vector& xi)
{
  if (basis.size() != data_.n || basis.fingerprint() != data_.basis_fingerprint)
    throw ConfigError("residual data does not match the current basis (fingerprint mismatch)");
  if (xi.size() != problem_->n_dofs())
    throw ConfigError("new basis vector has the wrong length");
  for (const auto& a : problem_->a) {
    const Vector rhs = a * xi;
    const Vector l = problem_->x_solver->solve(rhs);
    add_representer(l, problem_->x * l);
  }
  data_.n += 1;
  data_.basis_fingerprint =
      Fnv1a(data_.basis_fingerprint).update(xi.data(), static_cast<std::size_t>(xi.size()) * sizeof(double)).digest();
}

ResidualData riesz_offline(const AffineProblem& problem, const ReducedBasis& basis)
{
  if (basis.n_dofs() != problem.n_dofs())
    throw ConfigError("dimension mismatch between basis and problem");
  ResidualBuilder builder(problem);
  for (Eigen::Index i = 0; i < basis.size(); ++i)
    builder.extend(basis.truncated(i), basis.vector(i));
  return builder.data();
}

ResidualNorm residual_dual_norm(const ResidualData& data, const AffineCoefficients& coefficients,
                                const ParameterPoint& mu, const Vector& c)
{
  if (c.size() > data.n)
    throw ConfigError("residual data covers " + std::to_string(data.n) + " basis vectors, got " +
                      std::to_string(c.size()) + " coefficients");
  const ThetaValues theta = eval_thetas(coefficients, mu);
  const Eigen::Index qf = data.q_f;
  const Eigen::Index qa = data.q_a;
  const Eigen::Index k = qf + qa * c.size();
  Vector w(k);
  w.head(qf) = theta.f;
  for (Eigen::Index n = 0; n < c.size(); ++n)
    w.segment(qf + n * qa, qa) = -c[n] * theta.a;

  ResidualNorm out;
  const Matrix g = data.gram().topLeftCorner(k, k);
  out.gram_squared = w.dot(g * w);
  const double ff = theta.f.dot(data.g_ff * theta.f);
  out.cancellation = out.gram_squared < -1e-12 * ff;
  out.gram_norm = std::sqrt(std::max(out.gram_squared, 0.0));
  out.norm = (data.factor.topLeftCorner(k, k).triangularView<Eigen::Upper>() * w).norm();
  for (Eigen::Index i = 0; i < k; ++i)
    out.gross_scale += std::abs(w[i]) * std::sqrt(std::max(g(i, i), 0.0));
  out.below_floor = out.norm < 1e-7 * out.gross_scale;
  return out;
}

namespace {

StabilityBounds min_theta(const AffineCoefficients& c, const ParameterPoint& mu)
{
  const ThetaValues theta = eval_thetas(c, mu);
  const Vector ratio = theta.a.cwiseQuotient(c.theta_bar);
  return {ratio.minCoeff(), ratio.maxCoeff(), true};
}

} // namespace

StabilityBounds stability_bounds(const AffineProblem& problem, const ParameterPoint& mu)
{
  if (problem.coefficients.min_theta_valid)
    return min_theta(problem.coefficients, mu);
  const ThetaValues theta = eval_thetas(problem.coefficients, mu);
  const SparseMatrix a = problem.operator_at(theta.a);
  std::mt19937_64 rng(0x5ab1e5ULL);
  std::normal_distribution<double> normal;
  StabilityBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(), false};
  for (int trial = 0; trial < 64; ++trial) {
    Vector v(problem.n_dofs());
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = normal(rng);
    const double rq = v.dot(a * v) / v.dot(problem.x * v);
    b.alpha_lb = std::min(b.alpha_lb, rq);
    b.gamma_ub = std::max(b.gamma_ub, rq);
  }
  return b;
}

StabilityBounds stability_bounds(const ReducedModel& model, const ParameterPoint& mu)
{
  if (model.coefficients.min_theta_valid)
    return min_theta(model.coefficients, mu);
  const ThetaValues theta = eval_thetas(model.coefficients, mu);
  if (model.size() == 0)
    return {0.0, 0.0, false};
  Matrix a = theta.a[0] * model.a_rb[0];
  for (std::size_t q = 1; q < model.a_rb.size(); ++q)
    a += theta.a[static_cast<Eigen::Index>(q)] * model.a_rb[q];
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(a, Eigen::EigenvaluesOnly);
  return {eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff(), false};
}

Certificate certificate(const ReducedModel& model, const ResidualData& data, const ParameterPoint& mu)
{
  if (model.problem_fingerprint != data.problem_fingerprint ||
      model.basis_fingerprint != data.basis_fingerprint)
    throw ConfigError("reduced model and residual data do not share a fingerprint");

  const RBSolution sol = rb_solve(model, mu);
  const ResidualNorm r = residual_dual_norm(data, model.coefficients, mu, sol.coefficients);
  const StabilityBounds bounds = stability_bounds(model, mu);

  Certificate cert;
  cert.mu = mu;
  cert.coefficients = sol.coefficients;
  cert.s_rb = sol.s_rb;
  cert.u_rb_norm = sol.coefficients.norm();
  cert.r_norm = r.norm;
  cert.alpha_lb = bounds.alpha_lb;
  cert.gamma_ub = bounds.gamma_ub;
  cert.rigorous = bounds.rigorous;
  cert.out_of_domain = sol.out_of_domain;
  cert.residual_below_floor = r.below_floor;
  cert.cancellation = r.cancellation;

  if (!(bounds.alpha_lb > 0.0)) {
    // no usable coercivity bound here (e.g. far outside the domain)
    const double inf = std::numeric_limits<double>::infinity();
    cert.eta_en = cert.eta_s = cert.eta_v = cert.eta_v_rel = inf;
    cert.eta_s_rel = inf;
    cert.rigorous = false;
  } else {
    cert.eta_en = r.norm / std::sqrt(bounds.alpha_lb);
    cert.eta_s = r.norm * r.norm / bounds.alpha_lb;
    cert.eta_v = r.norm / bounds.alpha_lb;
    cert.eta_v_rel = cert.u_rb_norm > 0.0 ? 2.0 * r.norm / (bounds.alpha_lb * cert.u_rb_norm)
                                          : std::numeric_limits<double>::infinity();
  }
  cert.eta_v_rel_valid = cert.eta_v_rel <= 1.0;
  if (cert.s_rb > 0.0) {
    cert.eta_s_rel = cert.eta_s / cert.s_rb;
  } else {
    cert.eta_s_rel = std::numeric_limits<double>::quiet_NaN();
    cert.eta_s_rel_defined = false;
  }
  return cert;
}

EffectivityReport effectivities(const AffineProblem& problem, const ReducedModel& model,
                                const ResidualData& data, const ReducedBasis& basis,
                                const ParameterPoint& mu, const StabilityOracle& oracle)
{
  if (basis.fingerprint(std::min(basis.size(), model.size())) != model.basis_fingerprint)
    throw ConfigError("basis does not match the reduced model");

  EffectivityReport rep;
  rep.cert = certificate(model, data, mu);
  const Certificate& c = rep.cert;
  const TruthSolution truth = solve_fom(problem, mu);
  const ThetaValues theta = eval_thetas(problem.coefficients, mu);
  const SparseMatrix a = problem.operator_at(theta.a);

  const Vector e = truth.u - lift(basis.truncated(c.coefficients.size()), c.coefficients);
  rep.s_delta = truth.s;
  rep.err_mu = std::sqrt(std::max(e.dot(a * e), 0.0));
  rep.err_v = std::sqrt(std::max(e.dot(problem.x * e), 0.0));
  rep.err_s = truth.s - c.s_rb;
  rep.u_delta_v_norm = std::sqrt(truth.u.dot(problem.x * truth.u));
  const double u_delta_mu_norm = std::sqrt(truth.u.dot(a * truth.u));

  const StabilityConstants k = oracle(mu);
  rep.alpha_delta = k.alpha_delta;
  rep.gamma_delta = k.gamma_delta;
  const double ratio = k.gamma_delta / c.alpha_lb;
  rep.ceil_en = std::sqrt(ratio);
  rep.ceil_s = ratio;
  rep.ceil_s_rel = (1.0 + c.eta_s_rel) * ratio;
  rep.ceil_v = ratio;
  rep.ceil_v_rel = 3.0 * ratio;

  if (rep.err_mu >= 1e-10 * u_delta_mu_norm)
    rep.eff_en = c.eta_en / rep.err_mu;
  if (rep.err_s >= 1e-10 * std::abs(rep.s_delta) && rep.err_s > 0.0) {
    rep.eff_s = c.eta_s / rep.err_s;
    if (c.eta_s_rel_defined)
      rep.eff_s_rel = c.eta_s_rel * rep.s_delta / rep.err_s;
  }
  if (rep.err_v >= 1e-10 * rep.u_delta_v_norm) {
    rep.eff_v = c.eta_v / rep.err_v;
    rep.eff_v_rel = c.eta_v_rel * rep.u_delta_v_norm / rep.err_v;
  }

  constexpr double slack = 1e-10;
  rep.rigor_ok = rep.err_mu <= c.eta_en + slack && rep.err_s <= c.eta_s + slack &&
                 rep.err_v <= c.eta_v + slack;
  if (c.eta_s_rel_defined)
    rep.rigor_ok = rep.rigor_ok && rep.err_s / rep.s_delta <= c.eta_s_rel + slack;
  if (c.eta_v_rel_valid)
    rep.rigor_ok = rep.rigor_ok && rep.err_v / rep.u_delta_v_norm <= c.eta_v_rel + slack;

  constexpr double factor = 1.0 + 1e-8;
  auto under = [&](const std::optional<double>& eff, double ceiling) {
    return !eff || *eff <= ceiling * factor;
  };
  rep.ceilings_ok = under(rep.eff_en, rep.ceil_en) && under(rep.eff_s, rep.ceil_s) &&
                    under(rep.eff_s_rel, rep.ceil_s_rel) && under(rep.eff_v, rep.ceil_v) &&
                    (!c.eta_v_rel_valid || under(rep.eff_v_rel, rep.ceil_v_rel));
  return rep;
}

} // namespace romkit
