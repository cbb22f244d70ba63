#include "romkit/cli.hpp"

#include "romkit/archive.hpp"
#include "romkit/error.hpp"
#include "romkit/greedy.hpp"
#include "romkit/parallel.hpp"
#include "romkit/pod.hpp"
#include "romkit/report.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <optional>

namespace romkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct ProblemFlags
{
  std::string kind = "thermal";
  std::string manifest;
  int blocks = 2;
  int mesh_n = 32;
  double mu_lo = 0.1;
  double mu_hi = 10.0;

  void add_to(CLI::App* app)
  {
    app->add_option("--problem", kind, "thermal or external")->check(CLI::IsMember({"thermal", "external"}));
    app->add_option("--manifest", manifest, "external problem manifest (JSON)");
    app->add_option("--blocks", blocks, "thermal block: blocks per side");
    app->add_option("--mesh-n", mesh_n, "thermal block: cells per side");
    app->add_option("--mu-lo", mu_lo, "thermal block: lower conductivity bound");
    app->add_option("--mu-hi", mu_hi, "thermal block: upper conductivity bound");
  }

  AffineProblem build() const
  {
    if (kind == "external") {
      if (manifest.empty())
        throw ConfigError("--problem external needs --manifest");
      return load_external(manifest);
    }
    return make_thermal_block(mesh_n, blocks, mu_lo, mu_hi);
  }
};

ParameterPoint parse_mu(const std::string& text, int p)
{
  std::vector<double> values;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string field = text.substr(pos, comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (field.empty() || used != field.size())
      throw ConfigError("--mu: cannot read '" + field + "' as a number");
    values.push_back(v);
    pos = comma + 1;
  }
  if (static_cast<int>(values.size()) != p)
    throw ConfigError("--mu has " + std::to_string(values.size()) + " components, the model has p = " +
                      std::to_string(p));
  return ParameterPoint(Eigen::Map<const Vector>(values.data(), p));
}

json mu_json(const ParameterPoint& mu)
{
  return std::vector<double>(mu.values.data(), mu.values.data() + mu.size());
}

json number_or_null(double v)
{
  return std::isfinite(v) ? json(v) : json(nullptr);
}

SamplingStrategy strategy_from(const std::string& s)
{
  return s == "grid" ? SamplingStrategy::Grid : SamplingStrategy::Random;
}

int offline(const ProblemFlags& pf, const std::string& method, double tol, int n_max, std::size_t train,
            std::uint64_t seed, std::size_t snapshots, const std::string& sampling, std::optional<double> energy,
            std::optional<int> n_fixed, const std::string& out_dir, std::ostream& out, std::ostream& err)
{
  const auto start = Clock::now();
  err << "assembling " << pf.kind << " problem\n";
  const AffineProblem problem = pf.build();
  err << "N_delta = " << problem.n_dofs() << ", Q_a = " << problem.q_a() << ", Q_f = " << problem.q_f() << "\n";

  ReducedBasis basis;
  ReducedModel model;
  ResidualData residual;
  double truth_seconds = 0.0;
  json summary;
  if (method == "greedy") {
    const ParameterSet training =
        sample_parameters(problem.coefficients.domain, train, SamplingStrategy::Random, seed);
    GreedyOptions options;
    options.tolerance = tol;
    options.n_max = n_max;
    options.progress = [&err](int n, double estimate, const ParameterPoint&) {
      err << "greedy N = " << n << "  max relative estimator = " << std::setprecision(6) << estimate << "\n";
    };
    GreedyResult result = greedy_build(problem, training, options);
    truth_seconds = result.truth_solve_seconds;
    summary["stopping_reason"] = to_string(result.history().stopping_reason);
    const auto& est = result.history().max_estimator_per_iteration;
    summary["max_estimator"] = est.empty() ? json(nullptr) : number_or_null(est.back());
    summary["training_set_size"] = training.size();
    basis = std::move(result.basis);
    model = std::move(result.model);
    residual = std::move(result.residual);
  } else {
    if (energy && n_fixed)
      throw ConfigError("--energy and --n are mutually exclusive");
    const PodCriterion criterion = n_fixed ? PodCriterion::fixed(*n_fixed) : PodCriterion::energy(energy.value_or(1e-8));
    const ParameterSet params =
        sample_parameters(problem.coefficients.domain, snapshots, strategy_from(sampling), seed);
    err << "computing " << params.size() << " snapshots\n";
    const auto t0 = Clock::now();
    const SnapshotSet set = compute_snapshots(problem, params);
    truth_seconds = seconds_since(t0);
    basis = pod_basis(problem, set, criterion);
    const auto& spectrum = std::get<PodSpectrum>(basis.provenance);
    err << "POD rank " << spectrum.rank << ", keeping N = " << basis.size() << "\n";
    summary["snapshots"] = params.size();
    summary["pod_rank"] = spectrum.rank;
    model = project(problem, basis);
    residual = riesz_offline(problem, basis);
  }

  save_model(out_dir, make_archive(problem, basis, model, residual));
  err << "wrote " << out_dir << "\n";
  summary["method"] = method;
  summary["n"] = basis.size();
  summary["n_dofs"] = problem.n_dofs();
  summary["orthonormality_error"] = orthonormality_error(problem, basis);
  summary["truth_solve_seconds"] = truth_seconds;
  summary["offline_seconds"] = seconds_since(start);
  summary["out"] = out_dir;
  out << summary.dump(2) << "\n";
  return 0;
}

int online(const std::string& model_dir, const std::string& mu_text, bool as_json, int repeats, std::ostream& out)
{
  const auto load_start = Clock::now();
  const LoadedModel loaded = load_model(model_dir, LoadScope::Online);
  const double load_seconds = seconds_since(load_start);
  const ModelArchive& a = loaded.archive;
  const ParameterPoint mu = parse_mu(mu_text, a.model.num_params());

  if (repeats < 1)
    throw ConfigError("--repeat must be at least 1");
  Certificate cert;
  const auto start = Clock::now();
  for (int i = 0; i < repeats; ++i)
    cert = certificate(a.model, a.residual, mu);
  const double online_seconds = seconds_since(start) / repeats;

  if (as_json) {
    json j;
    j["mu"] = mu_json(mu);
    j["n"] = a.model.size();
    j["s_rb"] = cert.s_rb;
    j["eta_en"] = number_or_null(cert.eta_en);
    j["eta_s"] = number_or_null(cert.eta_s);
    j["eta_s_rel"] = cert.eta_s_rel_defined ? number_or_null(cert.eta_s_rel) : json(nullptr);
    j["eta_v"] = number_or_null(cert.eta_v);
    j["eta_v_rel"] = number_or_null(cert.eta_v_rel);
    j["eta_v_rel_valid"] = cert.eta_v_rel_valid;
    j["alpha_lb"] = cert.alpha_lb;
    j["gamma_ub"] = cert.gamma_ub;
    j["u_rb_norm"] = cert.u_rb_norm;
    j["rigorous"] = cert.rigorous;
    j["extrapolation"] = cert.out_of_domain;
    j["residual_below_floor"] = cert.residual_below_floor;
    j["cancellation"] = cert.cancellation;
    j["online_seconds"] = online_seconds;
    j["load_seconds"] = load_seconds;
    j["files_read"] = loaded.access_log;
    out << j.dump(2) << "\n";
    return 0;
  }

  out << std::setprecision(10);
  out << "N          " << a.model.size() << "\n";
  out << "s_rb       " << cert.s_rb << "\n";
  out << "eta_en     " << cert.eta_en << "\n";
  out << "eta_s      " << cert.eta_s << "\n";
  out << "eta_s_rel  ";
  if (cert.eta_s_rel_defined)
    out << cert.eta_s_rel << "\n";
  else
    out << "undefined (s_rb <= 0)\n";
  out << "eta_V      " << cert.eta_v << "\n";
  out << "eta_V_rel  " << cert.eta_v_rel << (cert.eta_v_rel_valid ? "" : " (above 1: not a valid bound)") << "\n";
  out << "alpha_LB   " << cert.alpha_lb << "\n";
  out << "gamma_UB   " << cert.gamma_ub << "\n";
  std::vector<std::string> flags;
  if (!cert.rigorous)
    flags.emplace_back("non-rigorous");
  if (cert.out_of_domain)
    flags.emplace_back("extrapolation");
  if (cert.residual_below_floor)
    flags.emplace_back("residual-below-floor");
  if (cert.cancellation)
    flags.emplace_back("cancellation");
  out << "flags      ";
  if (flags.empty())
    out << "none";
  for (std::size_t i = 0; i < flags.size(); ++i)
    out << (i ? "," : "") << flags[i];
  out << "\n";
  out << "online time " << online_seconds << " s\n";
  return 0;
}

int validate(const std::string& model_dir, std::size_t samples, std::uint64_t seed, const std::string& out_file,
             std::ostream& out, std::ostream& err)
{
  if (samples == 0)
    throw ConfigError("--samples must be at least 1");
  const LoadedModel loaded = load_model(model_dir, LoadScope::Full);
  const ModelArchive& a = loaded.archive;
  err << "rebuilding the full-order problem\n";
  const AffineProblem problem = rebuild_problem(model_dir, a);
  const StabilityOracle oracle(problem);
  const ParameterSet mus = sample_parameters(problem.coefficients.domain, samples, SamplingStrategy::Random, seed);
  std::vector<EffectivityReport> rows(mus.size());
  err << "validating " << mus.size() << " samples\n";
  parallel_for(mus.size(), [&](std::size_t i) {
    rows[i] = effectivities(problem, a.model, a.residual, a.basis, mus[i], oracle);
  });
  write_file(out_file, validation_csv(rows, problem.num_params()));

  const ValidationSummary s = summarize(rows);
  out << std::setprecision(6);
  out << "samples            " << s.samples << "\n";
  out << "rigor failures     " << s.rigor_failures << "\n";
  out << "ceiling failures   " << s.ceiling_failures << "\n";
  out << "eff_en min/median/max " << s.eff_en_min << " / " << s.eff_en_median << " / " << s.eff_en_max;
  if (s.indeterminate)
    out << "  (" << s.indeterminate << " indeterminate)";
  out << "\n";
  out << (s.passed() ? "PASS" : "FAIL") << "\n";
  return s.passed() ? 0 : 1;
}

int sweep(const std::string& model_dir, std::size_t count, const std::string& sampling, std::uint64_t seed,
          const std::string& out_file, std::ostream& out)
{
  if (count == 0)
    throw ConfigError("--count must be at least 1");
  const LoadedModel loaded = load_model(model_dir, LoadScope::Online);
  const ModelArchive& a = loaded.archive;
  const ParameterSet mus = sample_parameters(a.model.coefficients.domain, count, strategy_from(sampling), seed);
  std::vector<Certificate> rows(mus.size());
  parallel_for(mus.size(), [&](std::size_t i) { rows[i] = certificate(a.model, a.residual, mus[i]); });
  write_file(out_file, sweep_csv(rows, a.model.num_params()));
  out << "wrote " << rows.size() << " rows to " << out_file << "\n";
  return 0;
}

int report(const std::string& model_dir, const std::string& csv_file, const std::string& out_file,
           std::ostream& out)
{
  if (model_dir.empty() == csv_file.empty())
    throw ConfigError("report needs exactly one of --model or --csv");
  std::string svg;
  if (!model_dir.empty()) {
    const LoadedModel loaded = load_model(model_dir, LoadScope::Full);
    const auto& prov = loaded.archive.basis.provenance;
    if (const auto* h = std::get_if<GreedyHistory>(&prov)) {
      svg = decay_svg(h->max_estimator_per_iteration, "Greedy estimator decay");
    } else if (const auto* s = std::get_if<PodSpectrum>(&prov)) {
      std::vector<double> values(s->eigenvalues.data(), s->eigenvalues.data() + s->rank);
      svg = decay_svg(values, "POD eigenvalue decay");
    } else {
      throw ConfigError("model in " + model_dir + " has no greedy history or POD spectrum");
    }
  } else {
    const CsvTable table = parse_csv(read_file(csv_file));
    if (table.rows.empty())
      throw ConfigError(csv_file + " has no data rows");
    const std::size_t col = table.column("eff_en");
    std::vector<double> values;
    for (const auto& row : table.rows)
      if (row[col] != kIndeterminate)
        values.push_back(std::stod(row[col]));
    if (values.empty())
      throw ConfigError(csv_file + " has no determinate eff_en values");
    svg = histogram_svg(values, "Energy-norm effectivity");
  }
  write_file(out_file, svg);
  out << "wrote " << out_file << "\n";
  return 0;
}

int fom(const ProblemFlags& pf, const std::string& mu_text, const std::string& out_file, std::ostream& out)
{
  const AffineProblem problem = pf.build();
  const ParameterPoint mu = parse_mu(mu_text, problem.num_params());
  const TruthSolution sol = solve_fom(problem, mu);
  write_payload(out_file, Matrix(sol.u));
  json j;
  j["mu"] = mu_json(mu);
  j["n_dofs"] = problem.n_dofs();
  j["s"] = sol.s;
  j["solve_residual"] = sol.solve_residual;
  j["backward_error"] = sol.backward_error;
  j["extrapolation"] = sol.out_of_domain;
  j["out"] = out_file;
  out << j.dump(2) << "\n";
  return 0;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{"romkit: certified reduced basis models for affine elliptic problems"};
  app.require_subcommand(1);

  ProblemFlags offline_problem;
  std::string method = "greedy", sampling = "grid", out_dir;
  double tol = 1e-6;
  int n_max = 40;
  std::size_t train = 500, snapshots = 49;
  std::uint64_t seed = 0;
  std::optional<double> energy;
  std::optional<int> n_fixed;
  auto* off = app.add_subcommand("offline", "build and save a reduced model");
  offline_problem.add_to(off);
  off->add_option("--method", method, "greedy or pod")->check(CLI::IsMember({"greedy", "pod"}));
  off->add_option("--tol", tol, "greedy tolerance on the relative energy estimator");
  off->add_option("--n-max", n_max, "greedy maximum basis size");
  off->add_option("--train", train, "greedy training set size");
  off->add_option("--seed", seed, "random seed");
  off->add_option("--snapshots", snapshots, "POD snapshot count");
  off->add_option("--sampling", sampling, "POD snapshot sampling")->check(CLI::IsMember({"grid", "random"}));
  off->add_option("--energy", energy, "POD: discarded energy fraction");
  off->add_option("--n", n_fixed, "POD: fixed basis size");
  off->add_option("--out", out_dir, "output model directory")->required();

  std::string model_dir, mu_text;
  bool as_json = false;
  int repeats = 100;
  auto* on = app.add_subcommand("online", "certified reduced solve at one parameter");
  on->add_option("--model", model_dir, "model directory")->required();
  on->add_option("--mu", mu_text, "comma-separated parameter values")->required();
  on->add_flag("--json", as_json, "print JSON");
  on->add_option("--repeat", repeats, "online evaluations averaged for the timing");

  std::size_t samples = 100;
  std::uint64_t validate_seed = 0;
  std::string validate_out = "validate.csv";
  auto* val = app.add_subcommand("validate", "compare estimators with truth errors");
  val->add_option("--model", model_dir, "model directory")->required();
  val->add_option("--samples", samples, "number of random test parameters");
  val->add_option("--seed", validate_seed, "random seed");
  val->add_option("--out", validate_out, "output CSV");

  std::size_t sweep_count = 25;
  std::string sweep_sampling = "grid", sweep_out = "sweep.csv";
  std::uint64_t sweep_seed = 0;
  auto* sw = app.add_subcommand("sweep", "reduced output and estimator over a parameter sample");
  sw->add_option("--model", model_dir, "model directory")->required();
  sw->add_option("--count", sweep_count, "number of parameters (grid rounds up to a tensor grid)");
  sw->add_option("--sampling", sweep_sampling, "grid or random")->check(CLI::IsMember({"grid", "random"}));
  sw->add_option("--seed", sweep_seed, "random seed");
  sw->add_option("--out", sweep_out, "output CSV");

  std::string csv_file, report_out = "report.svg";
  auto* rep = app.add_subcommand("report", "SVG plot from a model history or a validation CSV");
  rep->add_option("--model", model_dir, "model directory (estimator decay)");
  rep->add_option("--csv", csv_file, "validation CSV (effectivity histogram)");
  rep->add_option("--out", report_out, "output SVG");

  ProblemFlags fom_problem;
  std::string fom_mu, fom_out = "u.rbm";
  auto* fo = app.add_subcommand("fom", "truth solve, writes u as an RBM1 payload");
  fom_problem.add_to(fo);
  fo->add_option("--mu", fom_mu, "comma-separated parameter values")->required();
  fo->add_option("--out", fom_out, "output payload");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (off->parsed())
      return offline(offline_problem, method, tol, n_max, train, seed, snapshots, sampling, energy, n_fixed, out_dir,
                     out, err);
    if (on->parsed())
      return online(model_dir, mu_text, as_json, repeats, out);
    if (val->parsed())
      return validate(model_dir, samples, validate_seed, validate_out, out, err);
    if (sw->parsed())
      return sweep(model_dir, sweep_count, sweep_sampling, sweep_seed, sweep_out, out);
    if (rep->parsed())
      return report(model_dir, csv_file, report_out, out);
    if (fo->parsed())
      return fom(fom_problem, fom_mu, fom_out, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

} // namespace romkit::cli
