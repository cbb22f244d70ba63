#pragma once

#include "romkit/expression.hpp"
#include "romkit/linalg.hpp"
#include "romkit/types.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace romkit {

enum class Scale { Linear, Log };

struct Interval
{
  double lo = 0.0;
  double hi = 1.0;
  Scale scale = Scale::Linear;
};

class ParameterDomain
{
public:
  ParameterDomain() = default;
  explicit ParameterDomain(std::vector<Interval> intervals);

  int dimension() const { return static_cast<int>(intervals_.size()); }
  const std::vector<Interval>& intervals() const { return intervals_; }

  // Inclusive, with a relative tolerance of 1e-12 on the bounds.
  bool contains(const ParameterPoint& mu) const;

  // Midpoint on each component's sampling scale.
  ParameterPoint midpoint() const;

private:
  std::vector<Interval> intervals_;
};

enum class SamplingStrategy { Grid, Random };

// grid: ceil(count^(1/p)) points per axis, full tensor product, lexicographic
// with the first component varying slowest. random: independent uniform
// draws on each component's scale.
ParameterSet sample_parameters(const ParameterDomain& domain, std::size_t count,
                               SamplingStrategy strategy, std::uint64_t seed);

// Everything about theta(mu) that the online stage needs: no operator data.
struct AffineCoefficients
{
  std::vector<ThetaExpression> theta_a;
  std::vector<ThetaExpression> theta_f;
  ParameterDomain domain;
  ParameterPoint mu_bar;
  Vector theta_bar;  // theta_a(mu_bar), the weights of X
  bool parametrically_coercive = false;
  // min-theta bounds are valid: coercive and X = sum_q theta_bar_q A_q
  bool min_theta_valid = false;

  int num_params() const { return domain.dimension(); }
  int q_a() const { return static_cast<int>(theta_a.size()); }
  int q_f() const { return static_cast<int>(theta_f.size()); }
};

struct ThetaValues
{
  Vector a;
  Vector f;
  bool out_of_domain = false;
};

// Throws NumericalError naming the offending coefficient if any value is not finite.
ThetaValues eval_thetas(const AffineCoefficients& coefficients, const ParameterPoint& mu);

struct ThermalBlockConfig
{
  int n = 0;
  int blocks_per_side = 0;
  double mu_lo = 0.0;
  double mu_hi = 0.0;
};

struct ExternalSource
{
  std::filesystem::path manifest;  // absolute path of the ingested manifest
};

struct AffineProblem
{
  std::vector<SparseMatrix> a;  // A_q
  std::vector<Vector> f;        // f_q
  SparseMatrix x;               // inner product
  AffineCoefficients coefficients;
  std::shared_ptr<const SpdSolver> x_solver;
  std::variant<ThermalBlockConfig, ExternalSource> source;
  std::uint64_t fingerprint = 0;

  Eigen::Index n_dofs() const { return x.rows(); }
  int q_a() const { return static_cast<int>(a.size()); }
  int q_f() const { return static_cast<int>(f.size()); }
  int num_params() const { return coefficients.num_params(); }
  bool compliant() const { return true; }

  SparseMatrix operator_at(const Vector& theta_a) const;
  Vector load_at(const Vector& theta_f) const;
};

// Finishes an AffineProblem whose a, f, x and coefficients are filled in:
// factors X, checks dimensions, computes the fingerprint.
void finalize_problem(AffineProblem& problem);

AffineProblem make_thermal_block(int n, int blocks_per_side, double mu_lo, double mu_hi);

// JSON manifest: { "p", "domain": [[lo,hi,"lin"|"log"],...], "mu_bar", "theta_a",
// "theta_f", "A": [paths], "f": [paths], "X": path (optional) }. Relative paths
// resolve against the manifest's directory.
AffineProblem load_external(const std::filesystem::path& manifest_path);

std::uint64_t problem_fingerprint(const AffineProblem& problem);

} // namespace romkit
