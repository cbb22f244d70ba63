#include "romkit/problem.hpp"

#include "romkit/assembly.hpp"
#include "romkit/error.hpp"
#include "romkit/fnv.hpp"
#include "romkit/matrix_market.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <random>

namespace romkit {

ParameterDomain::ParameterDomain(std::vector<Interval> intervals) : intervals_(std::move(intervals))
{
  for (std::size_t i = 0; i < intervals_.size(); ++i) {
    const auto& iv = intervals_[i];
    if (!(iv.lo < iv.hi))
      throw ConfigError("parameter interval " + std::to_string(i) + " needs lo < hi");
    if (iv.scale == Scale::Log && !(iv.lo > 0.0))
      throw ConfigError("logarithmic interval " + std::to_string(i) + " needs lo > 0");
  }
}

bool ParameterDomain::contains(const ParameterPoint& mu) const
{
  if (mu.size() != dimension())
    return false;
  for (int i = 0; i < dimension(); ++i) {
    const auto& iv = intervals_[static_cast<std::size_t>(i)];
    const double slack = 1e-12 * std::max(std::abs(iv.lo), std::abs(iv.hi));
    if (!(mu[i] >= iv.lo - slack && mu[i] <= iv.hi + slack))
      return false;
  }
  return true;
}

namespace {

double from_unit(const Interval& iv, double t)
{
  if (iv.scale == Scale::Log)
    return std::exp(std::log(iv.lo) + t * (std::log(iv.hi) - std::log(iv.lo)));
  return iv.lo + t * (iv.hi - iv.lo);
}

double axis_point(const Interval& iv, std::size_t k, std::size_t count)
{
  if (count == 1)
    return from_unit(iv, 0.5);
  if (k == 0)
    return iv.lo;
  if (k + 1 == count)
    return iv.hi;
  return from_unit(iv, static_cast<double>(k) / static_cast<double>(count - 1));
}

} // namespace

ParameterPoint ParameterDomain::midpoint() const
{
  ParameterPoint mu{Vector(dimension())};
  for (int i = 0; i < dimension(); ++i)
    mu[i] = from_unit(intervals_[static_cast<std::size_t>(i)], 0.5);
  return mu;
}

ParameterSet sample_parameters(const ParameterDomain& domain, std::size_t count,
                               SamplingStrategy strategy, std::uint64_t seed)
{
  if (count < 1)
    throw ConfigError("sample count must be at least 1");
  const int p = domain.dimension();
  ParameterSet out;
  if (strategy == SamplingStrategy::Random) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    out.reserve(count);
    for (std::size_t m = 0; m < count; ++m) {
      ParameterPoint mu{Vector(p)};
      for (int i = 0; i < p; ++i)
        mu[i] = from_unit(domain.intervals()[static_cast<std::size_t>(i)], unit(rng));
      out.push_back(std::move(mu));
    }
    return out;
  }

  // smallest k with k^p >= count, in integers
  std::size_t per_axis = 1;
  auto power = [p](std::size_t k) {
    std::size_t v = 1;
    for (int i = 0; i < p; ++i)
      v *= k;
    return v;
  };
  while (power(per_axis) < count)
    ++per_axis;
  const std::size_t total = power(per_axis);
  out.reserve(total);
  std::vector<std::size_t> index(static_cast<std::size_t>(p), 0);
  for (std::size_t m = 0; m < total; ++m) {
    ParameterPoint mu{Vector(p)};
    for (int i = 0; i < p; ++i)
      mu[i] = axis_point(domain.intervals()[static_cast<std::size_t>(i)],
                         index[static_cast<std::size_t>(i)], per_axis);
    out.push_back(std::move(mu));
    for (int i = p - 1; i >= 0; --i) {
      auto& k = index[static_cast<std::size_t>(i)];
      if (++k < per_axis)
        break;
      k = 0;
    }
  }
  return out;
}

ThetaValues eval_thetas(const AffineCoefficients& c, const ParameterPoint& mu)
{
  if (mu.size() != c.num_params())
    throw ConfigError("parameter point has " + std::to_string(mu.size()) + " components, expected " +
                      std::to_string(c.num_params()));
  ThetaValues out;
  out.a.resize(c.q_a());
  out.f.resize(c.q_f());
  for (int q = 0; q < c.q_a(); ++q) {
    out.a[q] = c.theta_a[static_cast<std::size_t>(q)].evaluate(mu.values);
    if (!std::isfinite(out.a[q]))
      throw NumericalError("theta_a[" + std::to_string(q) + "] is not finite at this parameter");
  }
  for (int q = 0; q < c.q_f(); ++q) {
    out.f[q] = c.theta_f[static_cast<std::size_t>(q)].evaluate(mu.values);
    if (!std::isfinite(out.f[q]))
      throw NumericalError("theta_f[" + std::to_string(q) + "] is not finite at this parameter");
  }
  out.out_of_domain = !c.domain.contains(mu);
  return out;
}

SparseMatrix AffineProblem::operator_at(const Vector& theta_a) const
{
  SparseMatrix out = theta_a[0] * a[0];
  for (std::size_t q = 1; q < a.size(); ++q)
    out += theta_a[static_cast<Eigen::Index>(q)] * a[q];
  out.makeCompressed();
  return out;
}

Vector AffineProblem::load_at(const Vector& theta_f) const
{
  Vector out = theta_f[0] * f[0];
  for (std::size_t q = 1; q < f.size(); ++q)
    out += theta_f[static_cast<Eigen::Index>(q)] * f[q];
  return out;
}

std::uint64_t problem_fingerprint(const AffineProblem& problem)
{
  Fnv1a h;
  auto sparse = [&h](const SparseMatrix& m) {
    h.update_value(m.rows()).update_value(m.cols());
    for (Eigen::Index k = 0; k < m.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(m, k); it; ++it)
        h.update_value(it.row()).update_value(it.col()).update_value(it.value());
  };
  for (const auto& a : problem.a)
    sparse(a);
  for (const auto& f : problem.f)
    h.update(f.data(), static_cast<std::size_t>(f.size()) * sizeof(double));
  sparse(problem.x);
  for (const auto& t : problem.coefficients.theta_a)
    h.update(t.to_string()).update("\n");
  for (const auto& t : problem.coefficients.theta_f)
    h.update(t.to_string()).update("\n");
  return h.digest();
}

void finalize_problem(AffineProblem& problem)
{
  auto& c = problem.coefficients;
  if (problem.a.empty() || problem.f.empty())
    throw ConfigError("affine problem needs at least one operator and one load");
  if (static_cast<int>(problem.a.size()) != c.q_a() || static_cast<int>(problem.f.size()) != c.q_f())
    throw ConfigError("number of theta expressions does not match the number of operators/loads");
  const Eigen::Index n = problem.x.rows();
  for (std::size_t q = 0; q < problem.a.size(); ++q)
    if (problem.a[q].rows() != n || problem.a[q].cols() != n)
      throw ConfigError("dimension mismatch: A[" + std::to_string(q) + "] is " +
                        std::to_string(problem.a[q].rows()) + " x " +
                        std::to_string(problem.a[q].cols()) + ", expected " + std::to_string(n));
  for (std::size_t q = 0; q < problem.f.size(); ++q)
    if (problem.f[q].size() != n)
      throw ConfigError("dimension mismatch: f[" + std::to_string(q) + "] has length " +
                        std::to_string(problem.f[q].size()) + ", expected " + std::to_string(n));
  c.theta_bar = eval_thetas(c, c.mu_bar).a;
  try {
    problem.x_solver = std::make_shared<const SpdSolver>(problem.x);
  } catch (const NumericalError& e) {
    throw ConfigError(std::string("inner-product matrix X is not SPD: ") + e.what());
  }
  problem.fingerprint = problem_fingerprint(problem);
}

AffineProblem make_thermal_block(int n, int blocks_per_side, double mu_lo, double mu_hi)
{
  if (!(mu_lo > 0.0 && mu_lo < mu_hi))
    throw ConfigError("thermal block needs 0 < mu_lo < mu_hi");
  const Mesh mesh = build_mesh(n, blocks_per_side);
  const DofMap dofs = make_dofmap(mesh);
  ThermalBlockOperators ops = assemble_thermal_block_operators(mesh, dofs);

  AffineProblem problem;
  const int p = mesh.num_blocks();
  problem.a = std::move(ops.stiffness);
  problem.f = std::move(ops.loads);
  problem.x = assemble_inner_product(problem.a, std::vector<double>(static_cast<std::size_t>(p), 1.0));

  auto& c = problem.coefficients;
  for (int q = 0; q < p; ++q)
    c.theta_a.push_back(ThetaExpression::parameter(q));
  c.theta_f.push_back(ThetaExpression::constant(1.0));
  c.domain = ParameterDomain(std::vector<Interval>(static_cast<std::size_t>(p), {mu_lo, mu_hi, Scale::Log}));
  c.mu_bar = ParameterPoint(Vector::Ones(p));
  c.parametrically_coercive = true;
  c.min_theta_valid = true;
  problem.source = ThermalBlockConfig{n, blocks_per_side, mu_lo, mu_hi};
  finalize_problem(problem);
  return problem;
}

namespace {

bool spot_check_psd(const SparseMatrix& a, std::uint64_t seed)
{
  const double scale = max_abs(a);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    if (a.coeff(i, i) < -1e-12 * scale)
      return false;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 16; ++trial) {
    Vector v(a.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i)
      v[i] = normal(rng);
    if (v.dot(a * v) < -1e-12 * scale * v.squaredNorm())
      return false;
  }
  return true;
}

} // namespace

AffineProblem load_external(const std::filesystem::path& manifest_path)
{
  std::ifstream in(manifest_path);
  if (!in)
    throw ConfigError("cannot open manifest " + manifest_path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + manifest_path.string() + " is not valid JSON: " + e.what());
  }
  const auto base = std::filesystem::absolute(manifest_path).parent_path();
  auto resolve = [&base](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
  };

  AffineProblem problem;
  auto& c = problem.coefficients;
  try {
    const int p = j.at("p").get<int>();
    if (p < 1)
      throw ConfigError("manifest: p must be at least 1");
    std::vector<Interval> intervals;
    for (const auto& d : j.at("domain")) {
      Interval iv{d.at(0).get<double>(), d.at(1).get<double>(), Scale::Linear};
      const std::string scale = d.size() > 2 ? d.at(2).get<std::string>() : "lin";
      if (scale == "log")
        iv.scale = Scale::Log;
      else if (scale != "lin")
        throw ConfigError("manifest: unknown sampling scale '" + scale + "'");
      intervals.push_back(iv);
    }
    if (static_cast<int>(intervals.size()) != p)
      throw ConfigError("manifest: domain has " + std::to_string(intervals.size()) +
                        " intervals, expected p = " + std::to_string(p));
    c.domain = ParameterDomain(std::move(intervals));
    const auto mu_bar = j.at("mu_bar").get<std::vector<double>>();
    if (static_cast<int>(mu_bar.size()) != p)
      throw ConfigError("manifest: mu_bar must have p components");
    c.mu_bar = ParameterPoint(Eigen::Map<const Vector>(mu_bar.data(), p));
    for (const auto& t : j.at("theta_a"))
      c.theta_a.push_back(ThetaExpression::parse(t.get<std::string>(), p));
    for (const auto& t : j.at("theta_f"))
      c.theta_f.push_back(ThetaExpression::parse(t.get<std::string>(), p));
    for (const auto& path : j.at("A"))
      problem.a.push_back(read_matrix_market(resolve(path.get<std::string>())));
    for (const auto& path : j.at("f"))
      problem.f.push_back(read_matrix_market_vector(resolve(path.get<std::string>())));
    if (j.contains("X") && !j.at("X").is_null())
      problem.x = read_matrix_market(resolve(j.at("X").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("manifest " + manifest_path.string() + ": " + e.what());
  }

  if (problem.a.empty())
    throw ConfigError("manifest lists no operators");
  const Eigen::Index n = problem.a.front().rows();
  for (std::size_t q = 0; q < problem.a.size(); ++q) {
    const auto& a = problem.a[q];
    if (a.rows() != n || a.cols() != n)
      throw ConfigError("dimension mismatch: A[" + std::to_string(q) + "] is " +
                        std::to_string(a.rows()) + " x " + std::to_string(a.cols()) +
                        ", expected " + std::to_string(n) + " x " + std::to_string(n));
    if (asymmetry(a) > 1e-12 * max_abs(a))
      throw ConfigError("A[" + std::to_string(q) + "] is not symmetric");
  }
  for (std::size_t q = 0; q < problem.f.size(); ++q)
    if (problem.f[q].size() != n)
      throw ConfigError("dimension mismatch: f[" + std::to_string(q) + "] has length " +
                        std::to_string(problem.f[q].size()) + ", expected " + std::to_string(n));

  const Vector theta_bar = eval_thetas(c, c.mu_bar).a;
  std::vector<double> weights(theta_bar.data(), theta_bar.data() + theta_bar.size());
  SparseMatrix x_reference = theta_bar[0] * problem.a[0];
  for (std::size_t q = 1; q < problem.a.size(); ++q)
    x_reference += weights[q] * problem.a[q];
  bool x_matches = true;
  if (problem.x.rows() == 0) {
    problem.x = x_reference;
  } else {
    if (problem.x.rows() != n || problem.x.cols() != n)
      throw ConfigError("dimension mismatch: X does not match the operators");
    if (asymmetry(problem.x) > 1e-12 * max_abs(problem.x))
      throw ConfigError("X is not symmetric");
    x_matches = max_abs(SparseMatrix(problem.x - x_reference)) <= 1e-10 * max_abs(problem.x);
  }
  problem.x.makeCompressed();

  // Parametric coercivity: theta_a > 0 over a dense sample, every A_q PSD.
  bool coercive = (theta_bar.array() > 0.0).all();
  const auto samples = sample_parameters(c.domain, 1000, SamplingStrategy::Random, 0x5eedULL);
  for (const auto& mu : samples) {
    ThetaValues values;
    try {
      values = eval_thetas(c, mu);
    } catch (const NumericalError& e) {
      throw ConfigError(std::string("theta expression not finite on the domain: ") + e.what());
    }
    if (!(values.a.array() > 0.0).all())
      coercive = false;
  }
  for (std::size_t q = 0; q < problem.a.size() && coercive; ++q)
    coercive = spot_check_psd(problem.a[q], 0x9e3779b9ULL + q);
  c.parametrically_coercive = coercive;
  c.min_theta_valid = coercive && x_matches;

  problem.source = ExternalSource{std::filesystem::absolute(manifest_path)};
  finalize_problem(problem);
  return problem;
}

} // namespace romkit
