#include "oracles.hpp"

#include <romkit/archive.hpp>
#include <romkit/error.hpp>
#include <romkit/greedy.hpp>
#include <romkit/matrix_market.hpp>
#include <romkit/pod.hpp>

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cstring>

#include <fstream>

using namespace romkit;
namespace fs = std::filesystem;

namespace {

std::map<std::string, std::string> directory_bytes(const fs::path& dir)
{
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file())
      out[fs::relative(e.path(), dir).string()] = read_file(e.path());
  return out;
}

ModelArchive greedy_archive(const AffineProblem& pb)
{
  GreedyOptions o;
  o.tolerance = 1e-4;
  const GreedyResult r = greedy_build(pb, sample_parameters(pb.coefficients.domain, 50, SamplingStrategy::Random, 1), o);
  return make_archive(pb, r.basis, r.model, r.residual);
}

} // namespace

TEST_CASE("RBM1 layout is bit-exact")
{
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, -0.5;
  const std::string bytes = encode_payload(m);
  REQUIRE(bytes.size() == 4 + 8 + 8 + 6 * 8);
  CHECK(bytes.substr(0, 4) == "RBM1");
  CHECK(static_cast<unsigned char>(bytes[4]) == 2);
  for (int i = 5; i < 12; ++i)
    CHECK(bytes[static_cast<std::size_t>(i)] == 0);
  CHECK(static_cast<unsigned char>(bytes[12]) == 3);
  // third value in row-major order is m(0,2) = 3.0 = 0x4008000000000000
  const std::string three = bytes.substr(20 + 2 * 8, 8);
  const unsigned char expected[8] = {0, 0, 0, 0, 0, 0, 0x08, 0x40};
  CHECK(std::memcmp(three.data(), expected, 8) == 0);
  CHECK(decode_payload(bytes, "m") == m);

  CHECK_THROWS_AS(decode_payload(bytes.substr(0, bytes.size() - 1), "m"), FormatError);
  CHECK_THROWS_AS(decode_payload("RBM2" + bytes.substr(4), "m"), FormatError);
  CHECK(decode_payload(encode_payload(Matrix(0, 4)), "e").cols() == 4);
}

TEST_CASE("save, load, save is byte-identical and reproduces online solves bitwise")
{
  const AffineProblem pb = make_thermal_block(8, 2, 0.1, 10.0);
  const ModelArchive a = greedy_archive(pb);
  const auto d1 = oracle::scratch_dir("archive-1"), d2 = oracle::scratch_dir("archive-2");
  save_model(d1, a);
  const LoadedModel loaded = load_model(d1);
  save_model(d2, loaded.archive);
  CHECK(directory_bytes(d1) == directory_bytes(d2));

  for (const auto& mu : sample_parameters(pb.coefficients.domain, 20, SamplingStrategy::Random, 3)) {
    const RBSolution x = rb_solve(a.model, mu), y = rb_solve(loaded.archive.model, mu);
    CHECK(std::memcmp(&x.s_rb, &y.s_rb, sizeof(double)) == 0);
    CHECK(std::memcmp(x.coefficients.data(), y.coefficients.data(), sizeof(double) * x.coefficients.size()) == 0);
    const Certificate cx = certificate(a.model, a.residual, mu), cy = certificate(loaded.archive.model, loaded.archive.residual, mu);
    CHECK(cx.eta_en == cy.eta_en);
  }
  CHECK(std::get<GreedyHistory>(loaded.archive.basis.provenance).selected_parameters ==
        std::get<GreedyHistory>(a.basis.provenance).selected_parameters);
  CHECK(rebuild_problem(d1, loaded.archive).fingerprint == pb.fingerprint);
}

TEST_CASE("online scope never opens the basis payload")
{
  const AffineProblem pb = make_thermal_block(8, 2, 0.1, 10.0);
  const auto dir = oracle::scratch_dir("archive-online");
  save_model(dir, greedy_archive(pb));
  const LoadedModel online = load_model(dir, LoadScope::Online);
  CHECK(online.archive.basis.size() == 0);
  for (const auto& f : online.access_log)
    CHECK(f != "basis.rbm");
  CHECK(std::find(online.access_log.begin(), online.access_log.end(), "a_rb_0.rbm") != online.access_log.end());
  const LoadedModel full = load_model(dir, LoadScope::Full);
  CHECK(std::find(full.access_log.begin(), full.access_log.end(), "basis.rbm") != full.access_log.end());
}

TEST_CASE("corrupted archives")
{
  const AffineProblem pb = make_thermal_block(8, 2, 0.1, 10.0);
  const auto dir = oracle::scratch_dir("archive-bad");
  save_model(dir, greedy_archive(pb));

  const std::string bytes = read_file(dir / "a_rb_1.rbm");
  write_file(dir / "a_rb_1.rbm", bytes.substr(0, bytes.size() - 8));
  CHECK_THROWS_WITH_AS(load_model(dir), doctest::Contains("a_rb_1.rbm"), FormatError);
  write_file(dir / "a_rb_1.rbm", bytes);
  CHECK_NOTHROW(load_model(dir));

  std::string manifest = read_file(dir / "manifest.json");
  const auto pos = manifest.find("\"format_version\": \"1\"");
  REQUIRE(pos != std::string::npos);
  std::string v2 = manifest;
  v2.replace(pos, 21, "\"format_version\": \"2\"");
  write_file(dir / "manifest.json", v2);
  CHECK_THROWS_WITH_AS(load_model(dir), doctest::Contains("unsupported model format version \"2\""), FormatError);
  write_file(dir / "manifest.json", "{ not json");
  CHECK_THROWS_AS(load_model(dir), FormatError);
  CHECK_THROWS_AS(load_model(dir / "missing"), FormatError);
}

TEST_CASE("POD archive of an external problem")
{
  const auto src = oracle::scratch_dir("archive-ext-src");
  const AffineProblem tb = make_thermal_block(8, 2, 0.1, 10.0);
  nlohmann::json paths = nlohmann::json::array();
  for (int q = 0; q < 4; ++q) {
    write_matrix_market(src / ("A" + std::to_string(q) + ".mtx"), tb.a[static_cast<std::size_t>(q)]);
    paths.push_back("A" + std::to_string(q) + ".mtx");
  }
  write_matrix_market(src / "f.mtx", tb.f[0]);
  std::ofstream(src / "m.json") << R"({"p": 4, "domain": [[0.1,10,"log"],[0.1,10,"log"],[0.1,10,"log"],[0.1,10,"log"]],
    "mu_bar": [1,1,1,1], "theta_a": ["mu[0]","mu[1]","mu[2]","mu[3]"], "theta_f": ["1"],
    "A": )" << paths.dump() << R"(, "f": ["f.mtx"]})";
  const AffineProblem ext = load_external(src / "m.json");
  const SnapshotSet snaps = compute_snapshots(ext, sample_parameters(ext.coefficients.domain, 16, SamplingStrategy::Grid, 0));
  const ReducedBasis b = pod_basis(ext, snaps, PodCriterion::fixed(6));
  const ModelArchive a = make_archive(ext, b, project(ext, b), riesz_offline(ext, b));

  const auto d1 = oracle::scratch_dir("archive-ext-1"), d2 = oracle::scratch_dir("archive-ext-2");
  save_model(d1, a);
  fs::remove_all(src);
  const LoadedModel loaded = load_model(d1);
  save_model(d2, loaded.archive);
  CHECK(directory_bytes(d1) == directory_bytes(d2));
  const AffineProblem rebuilt = rebuild_problem(d1, loaded.archive);
  CHECK(rebuilt.fingerprint == ext.fingerprint);
  const auto& s = std::get<PodSpectrum>(loaded.archive.basis.provenance);
  CHECK(s.retained == 6);
  CHECK(s.eigenvalues == std::get<PodSpectrum>(b.provenance).eigenvalues);
}

TEST_CASE("archive consistency checks")
{
  const AffineProblem pb = make_thermal_block(8, 2, 0.1, 10.0);
  const ModelArchive a = greedy_archive(pb);
  CHECK_THROWS_AS(make_archive(pb, a.basis.truncated(1), a.model, a.residual), ConfigError);
}
