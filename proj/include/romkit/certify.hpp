#pragma once

#include "romkit/reduced.hpp"
#include "romkit/truth.hpp"

#include <cstdint>
#include <optional>

namespace romkit {

// Offline residual data. The Riesz representers of the residual pieces are
// ordered  c_1..c_Qf  (X c_q = f_q)  followed, basis vector by basis vector,
// by  L_{1,n}..L_{Qa,n}  (X L_{q,n} = A_q xi_n),  so every block below is
// nested in N. With w = (theta_f, -c_1 theta_a, ..., -c_N theta_a) the residual
// dual norm is  ||r||^2 = w^T G w = ||R w||^2.
struct ResidualData
{
  int q_a = 0;
  int q_f = 0;
  Eigen::Index n = 0;
  Matrix g_ff;      // Q_f x Q_f
  Matrix g_fa;      // Q_f x Q_a N
  Matrix g_aa;      // Q_a N x Q_a N
  Matrix factor;    // R, upper triangular, R^T R = G, from X-orthogonalizing the representers
  std::uint64_t problem_fingerprint = 0;
  std::uint64_t basis_fingerprint = 0;

  Eigen::Index representer_count() const { return q_f + q_a * n; }
  // Full Gram matrix [[G_ff, G_fa], [G_fa^T, G_aa]].
  Matrix gram() const;
  ResidualData truncated(Eigen::Index n, std::uint64_t basis_prefix_fingerprint) const;
};

// Offline builder; owns the length-N_delta representers and extends the
// residual data one basis vector at a time.
class ResidualBuilder
{
public:
  explicit ResidualBuilder(const AffineProblem& problem);

  // `basis` holds the vectors already added; xi is the next one.
  void extend(const ReducedBasis& basis, const Vector& xi);

  const ResidualData& data() const { return data_; }

private:
  void add_representer(const Vector& r, const Vector& xr);

  const AffineProblem* problem_;
  Matrix representers_;
  Matrix x_representers_;
  Matrix orthonormal_;    // X-orthonormal directions (zero columns for dependent representers)
  Matrix x_orthonormal_;
  Matrix gram_;
  ResidualData data_;
};

ResidualData riesz_offline(const AffineProblem& problem, const ReducedBasis& basis);

struct ResidualNorm
{
  double norm = 0.0;           // ||R w||, the reported dual norm
  double gram_squared = 0.0;   // raw w^T G w
  double gram_norm = 0.0;      // sqrt(max(w^T G w, 0))
  bool cancellation = false;   // w^T G w < -1e-12 theta_f^T G_ff theta_f
  double gross_scale = 0.0;    // sum_k |w_k| sqrt(G_kk)
  bool below_floor = false;    // norm < 1e-7 gross_scale: relative accuracy not guaranteed
};

ResidualNorm residual_dual_norm(const ResidualData& data, const AffineCoefficients& coefficients,
                                const ParameterPoint& mu, const Vector& coefficients_rb);

struct StabilityBounds
{
  double alpha_lb = 0.0;
  double gamma_ub = 0.0;
  bool rigorous = false;
};

// Min/max-theta bounds when X = sum_q theta_bar_q A_q with all A_q PSD and
// theta_a > 0; otherwise sampled Rayleigh quotients (rigorous = false).
StabilityBounds stability_bounds(const AffineProblem& problem, const ParameterPoint& mu);
// Online variant; the non-rigorous fallback uses the spectrum of the reduced operator.
StabilityBounds stability_bounds(const ReducedModel& model, const ParameterPoint& mu);

struct Certificate
{
  ParameterPoint mu;
  Vector coefficients;
  double s_rb = 0.0;
  double u_rb_norm = 0.0;  // ||u_rb||_V = ||coefficients||_2
  double r_norm = 0.0;
  double alpha_lb = 0.0;
  double gamma_ub = 0.0;
  double eta_en = 0.0;
  double eta_s = 0.0;
  double eta_s_rel = 0.0;  // NaN when s_rb <= 0
  double eta_v = 0.0;
  double eta_v_rel = 0.0;
  bool eta_v_rel_valid = false;
  bool eta_s_rel_defined = true;
  bool rigorous = false;
  bool out_of_domain = false;
  bool residual_below_floor = false;
  bool cancellation = false;
};

Certificate certificate(const ReducedModel& model, const ResidualData& data, const ParameterPoint& mu);

struct EffectivityReport
{
  Certificate cert;
  double s_delta = 0.0;
  double err_mu = 0.0;      // ||u_delta - u_rb||_mu
  double err_v = 0.0;       // ||u_delta - u_rb||_V
  double err_s = 0.0;       // s_delta - s_rb
  double u_delta_v_norm = 0.0;
  double alpha_delta = 0.0;
  double gamma_delta = 0.0;

  // Empty when the matching true error is below 1e-10 of its scale.
  std::optional<double> eff_en, eff_s, eff_s_rel, eff_v, eff_v_rel;

  // Ceilings with alpha_LB and the exact gamma_delta.
  double ceil_en = 0.0, ceil_s = 0.0, ceil_s_rel = 0.0, ceil_v = 0.0, ceil_v_rel = 0.0;

  bool rigor_ok = true;     // every estimator dominates its error (1e-10 absolute slack)
  bool ceilings_ok = true;  // every determinate effectivity under its ceiling (1 + 1e-8)
};

EffectivityReport effectivities(const AffineProblem& problem, const ReducedModel& model,
                                const ResidualData& data, const ReducedBasis& basis,
                                const ParameterPoint& mu, const StabilityOracle& oracle);

} // namespace romkit
