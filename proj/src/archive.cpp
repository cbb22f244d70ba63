#include "romkit/archive.hpp"

#include "romkit/error.hpp"
#include "romkit/fnv.hpp"

#include <json.hpp>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace romkit {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "RBM1 payload code assumes a little-endian host");

namespace {

const char kMagic[4] = {'R', 'B', 'M', '1'};

std::string hex64(std::uint64_t v)
{
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t parse_hex64(const std::string& s, const std::string& what)
{
  if (s.size() != 16 || s.find_first_not_of("0123456789abcdef") != std::string::npos)
    throw FormatError("manifest: malformed " + what + " '" + s + "'");
  return std::stoull(s, nullptr, 16);
}

Matrix column(const Vector& v)
{
  return Matrix(v);
}

Vector as_vector(const Matrix& m, const std::string& name)
{
  if (m.cols() != 1)
    throw FormatError("payload " + name + " should be a single column");
  return m.col(0);
}

json domain_to_json(const ParameterDomain& domain)
{
  json out = json::array();
  for (const auto& iv : domain.intervals())
    out.push_back({iv.lo, iv.hi, iv.scale == Scale::Log ? "log" : "lin"});
  return out;
}

json coefficients_to_json(const AffineCoefficients& c)
{
  json j;
  j["theta_a"] = json::array();
  for (const auto& t : c.theta_a)
    j["theta_a"].push_back(t.to_string());
  j["theta_f"] = json::array();
  for (const auto& t : c.theta_f)
    j["theta_f"].push_back(t.to_string());
  j["domain"] = domain_to_json(c.domain);
  j["mu_bar"] = std::vector<double>(c.mu_bar.values.data(), c.mu_bar.values.data() + c.mu_bar.size());
  j["parametrically_coercive"] = c.parametrically_coercive;
  j["min_theta_valid"] = c.min_theta_valid;
  return j;
}

AffineCoefficients coefficients_from_json(const json& j)
{
  AffineCoefficients c;
  std::vector<Interval> intervals;
  for (const auto& d : j.at("domain")) {
    const std::string scale = d.at(2).get<std::string>();
    if (scale != "log" && scale != "lin")
      throw FormatError("manifest: unknown scale '" + scale + "'");
    intervals.push_back({d.at(0).get<double>(), d.at(1).get<double>(), scale == "log" ? Scale::Log : Scale::Linear});
  }
  c.domain = ParameterDomain(std::move(intervals));
  const int p = c.domain.dimension();
  const auto mu_bar = j.at("mu_bar").get<std::vector<double>>();
  if (static_cast<int>(mu_bar.size()) != p)
    throw FormatError("manifest: mu_bar has the wrong length");
  c.mu_bar = ParameterPoint(Eigen::Map<const Vector>(mu_bar.data(), p));
  for (const auto& t : j.at("theta_a"))
    c.theta_a.push_back(ThetaExpression::parse(t.get<std::string>(), p));
  for (const auto& t : j.at("theta_f"))
    c.theta_f.push_back(ThetaExpression::parse(t.get<std::string>(), p));
  c.theta_bar = eval_thetas(c, c.mu_bar).a;
  c.parametrically_coercive = j.at("parametrically_coercive").get<bool>();
  c.min_theta_valid = j.at("min_theta_valid").get<bool>();
  return c;
}

struct PayloadWriter
{
  fs::path directory;
  json entries = json::object();

  void add(const std::string& name, const Matrix& m, const char* scope)
  {
    const std::string bytes = encode_payload(m);
    const std::string file = name + ".rbm";
    write_file(directory / file, bytes);
    entries[name] = {{"file", file},
                     {"rows", m.rows()},
                     {"cols", m.cols()},
                     {"fnv1a", hex64(fnv1a(bytes.data(), bytes.size()))},
                     {"scope", scope}};
  }
};

class PayloadReader
{
public:
  PayloadReader(fs::path directory, const json& entries, std::vector<std::string>& log)
      : directory_(std::move(directory)), entries_(entries), log_(log)
  {
  }

  bool has(const std::string& name) const { return entries_.contains(name); }

  Matrix get(const std::string& name) const
  {
    if (!entries_.contains(name))
      throw FormatError("manifest lists no payload '" + name + "'");
    const json& e = entries_.at(name);
    const std::string file = e.at("file").get<std::string>();
    if (file.find('/') != std::string::npos || file.find('\\') != std::string::npos)
      throw FormatError("manifest: payload file name '" + file + "' is not a plain file name");
    log_.push_back(file);
    const std::string bytes = read_file(directory_ / file);
    const std::uint64_t expected = parse_hex64(e.at("fnv1a").get<std::string>(), "checksum of " + file);
    if (fnv1a(bytes.data(), bytes.size()) != expected)
      throw FormatError("checksum mismatch in payload " + file);
    Matrix m = decode_payload(bytes, file);
    if (m.rows() != e.at("rows").get<Eigen::Index>() || m.cols() != e.at("cols").get<Eigen::Index>())
      throw FormatError("payload " + file + " has a shape different from the manifest");
    return m;
  }

private:
  fs::path directory_;
  const json& entries_;
  std::vector<std::string>& log_;
};

} // namespace

std::string encode_payload(const Matrix& m)
{
  const auto rows = static_cast<std::uint64_t>(m.rows());
  const auto cols = static_cast<std::uint64_t>(m.cols());
  std::string out(4 + 16 + rows * cols * 8, '\0');
  char* p = out.data();
  std::memcpy(p, kMagic, 4);
  std::memcpy(p + 4, &rows, 8);
  std::memcpy(p + 12, &cols, 8);
  p += 20;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      std::memcpy(p, &v, 8);
      p += 8;
    }
  return out;
}

Matrix decode_payload(const std::string& bytes, const std::string& name)
{
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw FormatError("payload " + name + " is not an RBM1 file");
  std::uint64_t rows = 0, cols = 0;
  std::memcpy(&rows, bytes.data() + 4, 8);
  std::memcpy(&cols, bytes.data() + 12, 8);
  if ((cols != 0 && rows > (bytes.size() / 8) / cols) || bytes.size() != 20 + rows * cols * 8)
    throw FormatError("payload " + name + " is truncated or has trailing bytes");
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  const char* p = bytes.data() + 20;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::memcpy(&m(i, j), p, 8);
      p += 8;
    }
  return m;
}

std::string read_file(const fs::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& bytes)
{
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out)
    throw ConfigError("failed writing " + path.string());
}

void write_payload(const fs::path& path, const Matrix& m)
{
  write_file(path, encode_payload(m));
}

Matrix read_payload(const fs::path& path)
{
  return decode_payload(read_file(path), path.filename().string());
}

ProblemDescriptor describe_problem(const AffineProblem& problem)
{
  if (const auto* thermal = std::get_if<ThermalBlockConfig>(&problem.source))
    return *thermal;

  const fs::path manifest = std::get<ExternalSource>(problem.source).manifest;
  json j;
  try {
    j = json::parse(read_file(manifest));
  } catch (const json::exception& e) {
    throw ConfigError("cannot re-read manifest " + manifest.string() + ": " + e.what());
  }
  const fs::path base = manifest.parent_path();
  ExternalCopy copy;
  auto take = [&](const std::string& original, const std::string& name) {
    const fs::path path(original);
    copy.files[name] = read_file(path.is_absolute() ? path : base / path);
    return name;
  };
  for (std::size_t q = 0; q < j.at("A").size(); ++q)
    j["A"][q] = take(j["A"][q].get<std::string>(), "A_" + std::to_string(q) + ".mtx");
  for (std::size_t q = 0; q < j.at("f").size(); ++q)
    j["f"][q] = take(j["f"][q].get<std::string>(), "f_" + std::to_string(q) + ".mtx");
  if (j.contains("X") && !j.at("X").is_null())
    j["X"] = take(j["X"].get<std::string>(), "X.mtx");
  copy.files["manifest.json"] = j.dump(2) + "\n";
  return copy;
}

ModelArchive make_archive(const AffineProblem& problem, const ReducedBasis& basis,
                          const ReducedModel& model, const ResidualData& residual)
{
  if (model.size() != basis.size() || residual.n != basis.size())
    throw ConfigError("basis, reduced model and residual data have different sizes");
  if (model.basis_fingerprint != basis.fingerprint() || residual.basis_fingerprint != basis.fingerprint())
    throw ConfigError("reduced model or residual data were not built from this basis");
  ModelArchive archive;
  archive.problem = describe_problem(problem);
  archive.basis = basis;
  archive.model = model;
  archive.residual = residual;
  archive.problem_fingerprint = problem.fingerprint;
  archive.n_dofs = static_cast<std::size_t>(problem.n_dofs());
  return archive;
}

void save_model(const fs::path& directory, const ModelArchive& archive)
{
  const ReducedModel& model = archive.model;
  const ResidualData& res = archive.residual;
  if (archive.basis.size() != model.size())
    throw ConfigError("cannot save an archive without its basis");
  std::error_code ec;
  fs::create_directories(directory, ec);
  if (ec)
    throw ConfigError("cannot create " + directory.string() + ": " + ec.message());

  PayloadWriter payloads{directory};
  payloads.add("basis", archive.basis.vectors().transpose(), "offline");
  for (int q = 0; q < model.q_a(); ++q)
    payloads.add("a_rb_" + std::to_string(q), model.a_rb[static_cast<std::size_t>(q)], "online");
  for (int q = 0; q < model.q_f(); ++q)
    payloads.add("f_rb_" + std::to_string(q), column(model.f_rb[static_cast<std::size_t>(q)]), "online");
  payloads.add("gram_ff", res.g_ff, "online");
  payloads.add("gram_fa", res.g_fa, "online");
  payloads.add("gram_aa", res.g_aa, "online");
  payloads.add("residual_factor", res.factor, "online");

  json provenance = {{"kind", "none"}};
  if (const auto* pod = std::get_if<PodSpectrum>(&archive.basis.provenance)) {
    payloads.add("pod_eigenvalues", column(pod->eigenvalues), "offline");
    payloads.add("pod_eigenvectors", pod->eigenvectors, "offline");
    provenance = {{"kind", "pod"}, {"rank", pod->rank}, {"retained", pod->retained}};
  } else if (const auto* greedy = std::get_if<GreedyHistory>(&archive.basis.provenance)) {
    const int p = model.num_params();
    Matrix mus(static_cast<Eigen::Index>(greedy->selected_parameters.size()), p);
    for (std::size_t i = 0; i < greedy->selected_parameters.size(); ++i)
      mus.row(static_cast<Eigen::Index>(i)) = greedy->selected_parameters[i].values.transpose();
    payloads.add("greedy_parameters", mus, "offline");
    payloads.add("greedy_estimators",
                 column(Eigen::Map<const Vector>(greedy->max_estimator_per_iteration.data(),
                                                 static_cast<Eigen::Index>(greedy->max_estimator_per_iteration.size()))),
                 "offline");
    provenance = {{"kind", "greedy"},
                  {"stopping_reason", to_string(greedy->stopping_reason)},
                  {"training_set_size", greedy->training_set_size},
                  {"selected_training_index", greedy->selected_training_index}};
  }

  json problem;
  if (const auto* thermal = std::get_if<ThermalBlockConfig>(&archive.problem)) {
    problem = {{"kind", "thermal"},
               {"n", thermal->n},
               {"blocks_per_side", thermal->blocks_per_side},
               {"mu_lo", thermal->mu_lo},
               {"mu_hi", thermal->mu_hi}};
  } else {
    const auto& copy = std::get<ExternalCopy>(archive.problem);
    fs::create_directories(directory / "problem", ec);
    if (ec)
      throw ConfigError("cannot create " + (directory / "problem").string() + ": " + ec.message());
    json files = json::object();
    for (const auto& [name, bytes] : copy.files) {
      write_file(directory / "problem" / name, bytes);
      files[name] = hex64(fnv1a(bytes.data(), bytes.size()));
    }
    problem = {{"kind", "external"}, {"files", files}};
  }

  json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["n"] = model.size();
  manifest["n_dofs"] = archive.n_dofs;
  manifest["q_a"] = model.q_a();
  manifest["q_f"] = model.q_f();
  manifest["p"] = model.num_params();
  manifest["problem_fingerprint"] = hex64(archive.problem_fingerprint);
  manifest["basis_fingerprint"] = hex64(model.basis_fingerprint);
  manifest["coefficients"] = coefficients_to_json(model.coefficients);
  manifest["problem"] = problem;
  manifest["provenance"] = provenance;
  manifest["payloads"] = payloads.entries;
  write_file(directory / "manifest.json", manifest.dump(2) + "\n");
}

LoadedModel load_model(const fs::path& directory, LoadScope scope)
{
  LoadedModel loaded;
  auto& log = loaded.access_log;
  log.push_back("manifest.json");
  json manifest;
  try {
    manifest = json::parse(read_file(directory / "manifest.json"));
  } catch (const json::exception& e) {
    throw FormatError("manifest.json in " + directory.string() + " is not valid JSON: " + e.what());
  }

  ModelArchive& archive = loaded.archive;
  try {
    const std::string version = manifest.at("format_version").get<std::string>();
    if (version != kFormatVersion)
      throw FormatError("unsupported model format version \"" + version + "\" (this build reads version \"" +
                        kFormatVersion + "\")");
    const Eigen::Index n = manifest.at("n").get<Eigen::Index>();
    const int q_a = manifest.at("q_a").get<int>();
    const int q_f = manifest.at("q_f").get<int>();
    archive.n_dofs = manifest.at("n_dofs").get<std::size_t>();
    archive.problem_fingerprint = parse_hex64(manifest.at("problem_fingerprint").get<std::string>(), "problem fingerprint");
    const std::uint64_t basis_fp = parse_hex64(manifest.at("basis_fingerprint").get<std::string>(), "basis fingerprint");

    ReducedModel& model = archive.model;
    model.coefficients = coefficients_from_json(manifest.at("coefficients"));
    if (model.coefficients.q_a() != q_a || model.coefficients.q_f() != q_f ||
        model.num_params() != manifest.at("p").get<int>())
      throw FormatError("manifest: coefficient counts disagree with q_a/q_f/p");
    model.problem_fingerprint = archive.problem_fingerprint;
    model.basis_fingerprint = basis_fp;

    const PayloadReader payloads(directory, manifest.at("payloads"), log);
    for (int q = 0; q < q_a; ++q) {
      model.a_rb.push_back(payloads.get("a_rb_" + std::to_string(q)));
      if (model.a_rb.back().rows() != n || model.a_rb.back().cols() != n)
        throw FormatError("payload a_rb_" + std::to_string(q) + " is not N x N");
    }
    for (int q = 0; q < q_f; ++q) {
      const std::string name = "f_rb_" + std::to_string(q);
      model.f_rb.push_back(as_vector(payloads.get(name), name));
      if (model.f_rb.back().size() != n)
        throw FormatError("payload " + name + " does not have N rows");
    }

    ResidualData& res = archive.residual;
    res.q_a = q_a;
    res.q_f = q_f;
    res.n = n;
    res.g_ff = payloads.get("gram_ff");
    res.g_fa = payloads.get("gram_fa");
    res.g_aa = payloads.get("gram_aa");
    res.factor = payloads.get("residual_factor");
    res.problem_fingerprint = archive.problem_fingerprint;
    res.basis_fingerprint = basis_fp;
    const Eigen::Index k = res.representer_count();
    if (res.g_ff.rows() != q_f || res.g_ff.cols() != q_f || res.g_fa.rows() != q_f || res.g_fa.cols() != q_a * n ||
        res.g_aa.rows() != q_a * n || res.g_aa.cols() != q_a * n || res.factor.rows() != k || res.factor.cols() != k)
      throw FormatError("residual payloads have inconsistent shapes");

    const json& problem = manifest.at("problem");
    const std::string kind = problem.at("kind").get<std::string>();
    if (kind == "thermal") {
      archive.problem = ThermalBlockConfig{problem.at("n").get<int>(), problem.at("blocks_per_side").get<int>(),
                                           problem.at("mu_lo").get<double>(), problem.at("mu_hi").get<double>()};
    } else if (kind == "external") {
      ExternalCopy copy;
      if (scope == LoadScope::Full) {
        for (const auto& [name, checksum] : problem.at("files").items()) {
          if (name.find('/') != std::string::npos)
            throw FormatError("manifest: problem file name '" + name + "' is not a plain file name");
          log.push_back("problem/" + name);
          std::string bytes = read_file(directory / "problem" / name);
          if (fnv1a(bytes.data(), bytes.size()) != parse_hex64(checksum.get<std::string>(), "checksum of " + name))
            throw FormatError("checksum mismatch in problem file " + name);
          copy.files[name] = std::move(bytes);
        }
      }
      archive.problem = std::move(copy);
    } else {
      throw FormatError("manifest: unknown problem kind '" + kind + "'");
    }

    if (scope == LoadScope::Full) {
      const Matrix vectors = payloads.get("basis");
      if (vectors.rows() != n || static_cast<std::size_t>(vectors.cols()) != archive.n_dofs)
        throw FormatError("payload basis is not N x N_delta");
      archive.basis = ReducedBasis(vectors.cols());
      for (Eigen::Index i = 0; i < n; ++i)
        archive.basis.append(vectors.row(i).transpose());
      if (archive.basis.fingerprint() != basis_fp)
        throw FormatError("basis payload does not match the recorded basis fingerprint");

      const json& prov = manifest.at("provenance");
      const std::string pk = prov.at("kind").get<std::string>();
      if (pk == "pod") {
        PodSpectrum s;
        s.eigenvalues = as_vector(payloads.get("pod_eigenvalues"), "pod_eigenvalues");
        s.eigenvectors = payloads.get("pod_eigenvectors");
        s.rank = prov.at("rank").get<Eigen::Index>();
        s.retained = prov.at("retained").get<Eigen::Index>();
        archive.basis.provenance = std::move(s);
      } else if (pk == "greedy") {
        GreedyHistory h;
        const Matrix mus = payloads.get("greedy_parameters");
        for (Eigen::Index i = 0; i < mus.rows(); ++i)
          h.selected_parameters.emplace_back(Vector(mus.row(i).transpose()));
        const Vector est = as_vector(payloads.get("greedy_estimators"), "greedy_estimators");
        h.max_estimator_per_iteration.assign(est.data(), est.data() + est.size());
        h.selected_training_index = prov.at("selected_training_index").get<std::vector<std::size_t>>();
        h.stopping_reason = stopping_reason_from_string(prov.at("stopping_reason").get<std::string>());
        h.training_set_size = prov.at("training_set_size").get<std::size_t>();
        archive.basis.provenance = std::move(h);
      } else if (pk != "none") {
        throw FormatError("manifest: unknown provenance kind '" + pk + "'");
      }
    }
  } catch (const json::exception& e) {
    throw FormatError("manifest.json in " + directory.string() + ": " + e.what());
  }
  return loaded;
}

AffineProblem rebuild_problem(const fs::path& directory, const ModelArchive& archive)
{
  AffineProblem problem;
  if (const auto* thermal = std::get_if<ThermalBlockConfig>(&archive.problem))
    problem = make_thermal_block(thermal->n, thermal->blocks_per_side, thermal->mu_lo, thermal->mu_hi);
  else
    problem = load_external(directory / "problem" / "manifest.json");
  if (problem.fingerprint != archive.problem_fingerprint)
    throw FormatError("rebuilt problem does not match the archive's problem fingerprint");
  return problem;
}

} // namespace romkit
