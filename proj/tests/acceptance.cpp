// End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include "oracles.hpp"

#include <romkit/archive.hpp>
#include <romkit/certify.hpp>
#include <romkit/greedy.hpp>
#include <romkit/pod.hpp>
#include <romkit/reduced.hpp>
#include <romkit/truth.hpp>

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>

using namespace romkit;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome
{
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what)
  {
    if (!ok && pass)
      detail << "first failure: " << what << "; ";
    pass = pass && ok;
  }
};

int failures = 0;

void criterion(int id, const char* name, const std::function<void(Outcome&)>& body)
{
  Outcome o;
  const auto t0 = Clock::now();
  try {
    body(o);
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail << "exception: " << e.what() << "; ";
  }
  if (!o.pass)
    ++failures;
  std::printf("%s [%d] %s: %s(%.1f s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.str().c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

double rel(double a, double b)
{
  return std::abs(a - b) / std::abs(b);
}

std::string sci(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// Model of the first n vectors of a greedy or POD build.
struct Rom
{
  ReducedBasis basis;
  ReducedModel model;
  ResidualData residual;
};

Rom prefix(const Rom& full, Eigen::Index n)
{
  const std::uint64_t fp = full.basis.fingerprint(n);
  return {full.basis.truncated(n), full.model.truncated(n, fp), full.residual.truncated(n, fp)};
}

Rom from_greedy(GreedyResult&& g)
{
  return {std::move(g.basis), std::move(g.model), std::move(g.residual)};
}

// Errors of the reduced solution measured directly against the truth solve.
struct DirectErrors
{
  double s_delta, err_mu, err_v, err_s, u_v, u_mu;
};

DirectErrors direct_errors(const AffineProblem& pb, const Rom& rom, const Certificate& c)
{
  const TruthSolution t = solve_fom(pb, c.mu);
  const SparseMatrix a = pb.operator_at(eval_thetas(pb.coefficients, c.mu).a);
  const Vector e = t.u - rom.basis.vectors() * c.coefficients;
  return {t.s, std::sqrt(std::max(e.dot(a * e), 0.0)), std::sqrt(std::max(e.dot(pb.x * e), 0.0)), t.s - c.s_rb,
          std::sqrt(t.u.dot(pb.x * t.u)), std::sqrt(t.u.dot(a * t.u))};
}

constexpr int kMesh = 32;

const AffineProblem& default_problem()
{
  static const AffineProblem pb = make_thermal_block(kMesh, 2, 0.1, 10.0);
  return pb;
}

const Rom& default_greedy()
{
  static const Rom rom = [] {
    const AffineProblem& pb = default_problem();
    GreedyOptions opt;
    opt.tolerance = 1e-6;
    opt.n_max = 40;
    return from_greedy(
        greedy_build(pb, sample_parameters(pb.coefficients.domain, 500, SamplingStrategy::Random, 7), opt));
  }();
  return rom;
}

void analytic_regression(Outcome& o)
{
  const AffineProblem pb = make_thermal_block(kMesh, 1, 0.1, 10.0);
  ReducedBasis basis(pb.n_dofs());
  const TruthSolution ref = solve_fom(pb, pb.coefficients.mu_bar);
  basis.append(ref.u / v_norm(pb, ref.u));
  const ReducedModel model = project(pb, basis);
  double worst_delta = 0.0, worst_rb = 0.0;
  for (const auto& mu : sample_parameters(pb.coefficients.domain, 25, SamplingStrategy::Grid, 0)) {
    const double exact = 1.0 / mu[0];
    worst_delta = std::max(worst_delta, rel(solve_fom(pb, mu).s, exact));
    worst_rb = std::max(worst_rb, rel(rb_solve(model, mu).s_rb, exact));
  }
  o.require(worst_delta <= 1e-8, "s_delta vs 1/mu");
  o.require(worst_rb <= 1e-8, "s_rb vs 1/mu");
  o.detail << "max rel err s_delta " << sci(worst_delta) << ", s_rb " << sci(worst_rb) << " (tol 1e-8) ";
}

void pod_identity(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const SnapshotSet snaps =
      compute_snapshots(pb, sample_parameters(pb.coefficients.domain, 49, SamplingStrategy::Grid, 0));
  const ReducedBasis basis = pod_basis(pb, snaps, PodCriterion::energy(0.0));
  const PodSpectrum& spectrum = std::get<PodSpectrum>(basis.provenance);
  const Matrix x = Matrix(pb.x);

  long double trace = 0.0L;
  const oracle::LMat lx = x.cast<long double>();
  for (Eigen::Index m = 0; m < snaps.size(); ++m)
    trace += oracle::x_norm_sq(lx, snaps.vectors.col(m).cast<long double>());
  trace /= snaps.size();
  const double trace_err = std::abs(static_cast<double>((spectrum.eigenvalues.sum() - trace) / trace));
  o.require(trace_err <= 1e-12, "trace identity");

  double worst = 0.0;
  for (Eigen::Index n = 0; n <= basis.size(); ++n) {
    const long double lhs = oracle::mean_projection_error(x, snaps.vectors, basis.vectors().leftCols(n));
    long double rhs = 0.0L;
    for (Eigen::Index i = n; i < spectrum.eigenvalues.size(); ++i)
      rhs += spectrum.eigenvalues[i];
    const double err = std::abs(static_cast<double>((lhs - rhs) / rhs));
    worst = std::max(worst, err);
    o.require(err <= 1e-9, "identity at N = " + std::to_string(n));
  }
  o.detail << "M = " << snaps.size() << ", N = 0.." << basis.size() << ", max rel err " << sci(worst)
           << " (tol 1e-9), trace rel err " << sci(trace_err) << " (tol 1e-12) ";
}

void orthonormality(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const SnapshotSet snaps =
      compute_snapshots(pb, sample_parameters(pb.coefficients.domain, 49, SamplingStrategy::Grid, 0));
  const ReducedBasis pod = pod_basis(pb, snaps, PodCriterion::energy(0.0));
  const ReducedBasis& greedy = default_greedy().basis;
  double worst_pod = 0.0, worst_greedy = 0.0;
  for (Eigen::Index n = 1; n <= pod.size(); ++n)
    worst_pod = std::max(worst_pod, orthonormality_error(pb, pod.truncated(n)));
  for (Eigen::Index n = 1; n <= greedy.size(); ++n)
    worst_greedy = std::max(worst_greedy, orthonormality_error(pb, greedy.truncated(n)));
  o.require(worst_pod <= 1e-10, "POD basis");
  o.require(worst_greedy <= 1e-10, "greedy basis");
  o.detail << "POD N <= " << pod.size() << ": " << sci(worst_pod) << ", greedy N <= " << greedy.size() << ": "
           << sci(worst_greedy) << " (tol 1e-10) ";
}

// The fine greedy model and a coarse prefix of it with large, measurable errors.
std::vector<std::pair<std::string, Rom>> rigor_models()
{
  const Rom& fine = default_greedy();
  return {{"N=" + std::to_string(fine.basis.size()), fine}, {"N=4", prefix(fine, 4)}};
}

void rigor_suite(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const auto mus = sample_parameters(pb.coefficients.domain, 100, SamplingStrategy::Random, 2024);
  int identity_checks = 0;
  double worst_identity = 0.0;
  for (const auto& [name, rom] : rigor_models()) {
    for (const auto& mu : mus) {
      const Certificate c = certificate(rom.model, rom.residual, mu);
      const DirectErrors d = direct_errors(pb, rom, c);
      const std::string at = name + " mu sample";
      o.require(c.eta_en >= d.err_mu - 1e-10, at + ": energy bound");
      o.require(c.eta_s >= d.err_s - 1e-10, at + ": output bound");
      o.require(c.eta_s_rel >= d.err_s / d.s_delta - 1e-10, at + ": relative output bound");
      o.require(c.eta_v >= d.err_v - 1e-10, at + ": V-norm bound");
      if (c.eta_v_rel_valid)
        o.require(c.eta_v_rel >= d.err_v / d.u_v - 1e-10, at + ": relative V-norm bound");
      o.require(d.s_delta >= c.s_rb - 1e-12, at + ": s_delta >= s_rb");
      if (d.err_s > 1e-6 * d.s_delta) {
        ++identity_checks;
        const double r = rel(d.err_s, d.err_mu * d.err_mu);
        worst_identity = std::max(worst_identity, r);
        o.require(r <= 1e-8, at + ": compliance identity");
      }
    }
  }
  o.detail << "2 models x 100 mu, compliance identity on " << identity_checks << " samples, max rel err "
           << sci(worst_identity) << " (tol 1e-8) ";
}

void effectivity_ceilings(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const StabilityOracle stab(pb);
  const auto mus = sample_parameters(pb.coefficients.domain, 100, SamplingStrategy::Random, 2025);
  double worst_ratio = 0.0, worst_square = 0.0;
  int samples = 0, square_checks = 0;
  for (const auto& [name, rom] : rigor_models()) {
    for (const auto& mu : mus) {
      const Certificate c = certificate(rom.model, rom.residual, mu);
      const DirectErrors d = direct_errors(pb, rom, c);
      const StabilityConstants k = stab(mu);
      const double ratio = k.gamma_delta / c.alpha_lb;
      const std::string at = name + " mu sample";
      // effectivities are only determinate when the error is above 1e-10 of its scale
      auto ceiling = [&](double estimate, double error, double scale, double limit, const std::string& what) {
        if (error < 1e-10 * scale || error <= 0.0)
          return;
        const double eff = estimate / error;
        worst_ratio = std::max(worst_ratio, eff / limit);
        o.require(eff <= limit * (1 + 1e-8), at + ": " + what);
      };
      if (d.err_mu <= 1e-10 * d.u_v)
        continue;
      ++samples;
      ceiling(c.eta_en, d.err_mu, d.u_mu, std::sqrt(ratio), "eff_en");
      ceiling(c.eta_s, d.err_s, d.s_delta, ratio, "eff_s");
      ceiling(c.eta_s_rel, d.err_s / d.s_delta, 1.0, (1 + c.eta_s_rel) * ratio, "eff_s_rel");
      ceiling(c.eta_v, d.err_v, d.u_v, ratio, "eff_V");
      if (c.eta_v_rel_valid)
        ceiling(c.eta_v_rel, d.err_v / d.u_v, 1.0, 3 * ratio, "eff_V_rel");
      if (d.err_s > 1e-6 * d.s_delta) {
        ++square_checks;
        const double eff_en = c.eta_en / d.err_mu, eff_s = c.eta_s / d.err_s;
        const double r = rel(eff_s, eff_en * eff_en);
        worst_square = std::max(worst_square, r);
        o.require(r <= 1e-10, at + ": eff_s = eff_en^2");
      }
    }
  }
  o.detail << samples << " samples, max eff/ceiling " << sci(worst_ratio) << " (limit 1+1e-8), eff_s = eff_en^2 on "
           << square_checks << " samples, max rel err " << sci(worst_square) << " (tol 1e-10) ";
}

void riesz_equivalence(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const Rom& full = default_greedy();
  Eigen::SimplicialLDLT<SparseMatrix> xs(pb.x);
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<Eigen::Index> pick_n(1, full.basis.size());
  const auto mus = sample_parameters(pb.coefficients.domain, 50, SamplingStrategy::Random, 31);
  int compared = 0, flagged = 0;
  double worst = 0.0;
  for (const auto& mu : mus) {
    const Eigen::Index n = pick_n(rng);
    const Rom rom = prefix(full, n);
    const RBSolution rb = rb_solve(rom.model, mu);
    const ResidualNorm rn = residual_dual_norm(rom.residual, rom.model.coefficients, mu, rb.coefficients);
    const ThetaValues th = eval_thetas(pb.coefficients, mu);
    const Vector r = pb.load_at(th.f) - pb.operator_at(th.a) * (rom.basis.vectors() * rb.coefficients);
    const Vector rhat = xs.solve(r);
    const double direct = std::sqrt(rhat.dot(pb.x * rhat));
    const bool under_floor = direct < 1e-7 * rn.gross_scale;
    if (rn.below_floor || rn.cancellation) {
      ++flagged;
      o.require(under_floor || rn.norm < 1e-7 * rn.gross_scale, "flag raised above the floor");
      continue;
    }
    o.require(!under_floor, "unflagged pair below the floor (N = " + std::to_string(n) + ")");
    ++compared;
    const double err = rel(rn.norm, direct);
    worst = std::max(worst, err);
    o.require(err <= 1e-9, "dual norm mismatch at N = " + std::to_string(n));
  }
  o.detail << compared << " pairs compared, max rel err " << sci(worst) << " (tol 1e-9), " << flagged
           << " flagged below the floor ";
}

double slope(const std::vector<double>& y)
{
  const double n = static_cast<double>(y.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double x = static_cast<double>(i);
    sx += x;
    sy += y[i];
    sxx += x * x;
    sxy += x * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

void greedy_behavior(Outcome& o)
{
  const AffineProblem pb = make_thermal_block(kMesh, 2, 0.5, 2.0);
  const ParameterSet train = sample_parameters(pb.coefficients.domain, 500, SamplingStrategy::Random, 11);
  GreedyOptions opt;
  opt.tolerance = 1e-6;
  opt.n_max = 40;
  const GreedyResult g = greedy_build(pb, train, opt);
  const GreedyHistory& h = g.history();
  o.require(h.stopping_reason == StoppingReason::Tolerance, "stopping reason");
  o.require(g.basis.size() <= 25, "N <= 25");

  double worst_u = 0.0, worst_eta = 0.0;
  for (const auto& mu : h.selected_parameters) {
    const TruthSolution t = solve_fom(pb, mu);
    const Certificate c = certificate(g.model, g.residual, mu);
    const Vector e = t.u - g.basis.vectors() * c.coefficients;
    worst_u = std::max(worst_u, std::sqrt(e.dot(pb.x * e)) / std::sqrt(t.u.dot(pb.x * t.u)));
    worst_eta = std::max(worst_eta, c.eta_en / c.u_rb_norm);
  }
  o.require(worst_u <= 1e-9, "reproduction of selected snapshots");
  o.require(worst_eta <= 1e-8, "estimator at selected parameters");

  std::vector<double> logs;
  for (double v : h.max_estimator_per_iteration)
    logs.push_back(std::log10(v));
  const double s = slope(logs);
  o.require(s < 0.0, "log-estimator slope");

  const GreedyResult again = greedy_build(pb, train, opt);
  const bool same = again.basis.fingerprint() == g.basis.fingerprint() &&
                    again.history().selected_training_index == h.selected_training_index &&
                    again.history().max_estimator_per_iteration == h.max_estimator_per_iteration;
  o.require(same, "determinism");
  o.detail << "stopped by " << to_string(h.stopping_reason) << " at N = " << g.basis.size()
           << ", reproduction " << sci(worst_u) << " (tol 1e-9), eta_en/|u_rb| " << sci(worst_eta)
           << " (tol 1e-8), slope " << sci(s) << " per iteration, rerun identical: " << (same ? "yes" : "no") << " ";
}

void min_theta_sandwich(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const Matrix x = oracle::thermal_block(kMesh, 2, {1, 1, 1, 1}).a;
  double worst_lo = 0.0, worst_hi = 0.0;
  for (const auto& mu : sample_parameters(pb.coefficients.domain, 20, SamplingStrategy::Random, 77)) {
    const auto ref = oracle::thermal_block(kMesh, 2, {mu[0], mu[1], mu[2], mu[3]});
    const auto [alpha, gamma] = oracle::generalized_extremes(ref.a, x);
    const StabilityBounds b = stability_bounds(pb, mu);
    o.require(b.rigorous, "bounds marked rigorous");
    o.require(b.alpha_lb <= alpha * (1 + 1e-10), "alpha_LB <= alpha_delta");
    o.require(gamma <= b.gamma_ub * (1 + 1e-10), "gamma_delta <= gamma_UB");
    worst_lo = std::max(worst_lo, b.alpha_lb / alpha);
    worst_hi = std::max(worst_hi, gamma / b.gamma_ub);
  }
  o.detail << "20 mu, max alpha_LB/alpha_delta " << sci(worst_lo) << ", max gamma_delta/gamma_UB " << sci(worst_hi)
           << " ";
}

void persistence(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const Rom& rom = default_greedy();
  const auto dir = oracle::scratch_dir("acceptance-persistence");
  save_model(dir / "a", make_archive(pb, rom.basis, rom.model, rom.residual));
  const LoadedModel loaded = load_model(dir / "a");
  save_model(dir / "b", loaded.archive);
  int files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "a")) {
    if (!entry.is_regular_file())
      continue;
    ++files;
    const auto other = dir / "b" / std::filesystem::relative(entry.path(), dir / "a");
    o.require(std::filesystem::exists(other) && read_file(entry.path()) == read_file(other),
              "bytes differ: " + entry.path().filename().string());
  }
  int bitwise = 0;
  for (const auto& mu : sample_parameters(pb.coefficients.domain, 20, SamplingStrategy::Random, 5)) {
    const RBSolution a = rb_solve(rom.model, mu);
    const RBSolution b = rb_solve(loaded.archive.model, mu);
    const bool same = a.s_rb == b.s_rb && a.coefficients == b.coefficients;
    bitwise += same;
    o.require(same, "rb_solve differs after reload");
  }
  o.detail << files << " files byte-identical after save/load/save, rb_solve bitwise on " << bitwise << "/20 mu ";
}

struct TimingProbe
{
  double online = 0.0;  // seconds per rb_solve + certificate
  double truth = 0.0;   // seconds per truth solve
};

TimingProbe timing_probe(int mesh)
{
  const AffineProblem pb = make_thermal_block(mesh, 2, 0.1, 10.0);
  GreedyOptions opt;
  opt.tolerance = 1e-4;
  opt.n_max = 12;
  const GreedyResult g =
      greedy_build(pb, sample_parameters(pb.coefficients.domain, 100, SamplingStrategy::Random, 3), opt);
  const auto mus = sample_parameters(pb.coefficients.domain, 10, SamplingStrategy::Random, 4);
  TimingProbe t;
  auto t0 = Clock::now();
  for (const auto& mu : mus)
    solve_fom(pb, mu);
  t.truth = seconds_since(t0) / static_cast<double>(mus.size());
  constexpr int repeat = 2000;
  double sink = 0.0;
  t0 = Clock::now();
  for (int r = 0; r < repeat; ++r)
    for (const auto& mu : mus)
      sink += certificate(g.model, g.residual, mu).eta_en;
  t.online = seconds_since(t0) / (repeat * static_cast<double>(mus.size()));
  if (!(sink >= 0.0))
    std::printf("unexpected estimator sum\n");
  return t;
}

void online_independence(Outcome& o)
{
  const AffineProblem& pb = default_problem();
  const Rom& rom = default_greedy();
  const auto dir = oracle::scratch_dir("acceptance-online");
  save_model(dir, make_archive(pb, rom.basis, rom.model, rom.residual));
  const LoadedModel m = load_model(dir, LoadScope::Online);
  int payloads = 0;
  for (const auto& name : m.access_log) {
    o.require(name != "basis.rbm", "online load opened the basis");
    if (name.size() > 4 && name.substr(name.size() - 4) == ".rbm") {
      ++payloads;
      const Matrix p = read_payload(dir / name);
      o.require(p.rows() != pb.n_dofs() && p.cols() != pb.n_dofs(), name + " has an N_delta dimension");
    }
  }
  o.require(m.archive.basis.size() == 0, "online load kept basis vectors");
  o.require(payloads > 0, "online load read no payloads");
  const RBSolution a = rb_solve(rom.model, pb.coefficients.mu_bar);
  const RBSolution b = rb_solve(m.archive.model, pb.coefficients.mu_bar);
  o.require(a.s_rb == b.s_rb, "online-scope model disagrees");

  const TimingProbe coarse = timing_probe(16), fine = timing_probe(64);
  const double online_ratio = fine.online / coarse.online, truth_ratio = fine.truth / coarse.truth;
  o.detail << "online load read " << m.access_log.size() << " files, none of length N_delta; timing (informational) "
           << "mesh 16 -> 64: online x" << sci(online_ratio) << (online_ratio < 2 ? " (<2 met)" : " (<2 missed)")
           << ", truth solve x" << sci(truth_ratio) << (truth_ratio > 5 ? " (>5 met) " : " (>5 missed) ");
}

} // namespace

int main()
{
  const auto t0 = Clock::now();
  criterion(1, "analytic regression", analytic_regression);
  criterion(2, "POD identity", pod_identity);
  criterion(3, "basis orthonormality", orthonormality);
  criterion(4, "rigor suite", rigor_suite);
  criterion(5, "effectivity ceilings", effectivity_ceilings);
  criterion(6, "Riesz oracle equivalence", riesz_equivalence);
  criterion(7, "greedy behavior", greedy_behavior);
  criterion(8, "min-theta sandwich", min_theta_sandwich);
  criterion(9, "persistence", persistence);
  criterion(10, "online N_delta-independence", online_independence);
  std::printf("%d of 10 criteria failed, total %.1f s\n", failures, seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
