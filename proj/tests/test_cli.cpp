#include "oracles.hpp"

#include <romkit/archive.hpp>
#include <romkit/cli.hpp>
#include <romkit/report.hpp>

#include <doctest.h>
#include <json.hpp>

#include <sstream>

using namespace romkit;

namespace {

struct Run
{
  int code = 0;
  std::string out, err;
};

Run romkit_cli(std::vector<std::string> args)
{
  args.insert(args.begin(), "romkit");
  std::vector<const char*> argv;
  for (const auto& a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

} // namespace

TEST_CASE("offline, online, validate, report on a greedy model")
{
  const auto dir = oracle::scratch_dir("cli");
  const std::string model = (dir / "model").string();
  const Run off = romkit_cli({"offline", "--problem", "thermal", "--blocks", "2", "--mesh-n", "8", "--method", "greedy",
                              "--tol", "1e-5", "--n-max", "40", "--train", "100", "--seed", "7", "--out", model});
  REQUIRE_MESSAGE(off.code == 0, off.err);
  const auto summary = nlohmann::json::parse(off.out);
  CHECK(summary["stopping_reason"] == "tolerance");
  CHECK(summary["n"].get<int>() >= 1);
  CHECK(off.err.find("greedy N = 1") != std::string::npos);

  const Run on = romkit_cli({"online", "--model", model, "--mu", "0.5,2,1,1"});
  CHECK(on.code == 0);
  CHECK(on.out.find("s_rb") != std::string::npos);
  CHECK(on.out.find("online time") != std::string::npos);

  const Run js = romkit_cli({"online", "--model", model, "--mu", "50,2,1,1", "--json"});
  CHECK(js.code == 0);
  const auto j = nlohmann::json::parse(js.out);
  CHECK(j["extrapolation"] == true);
  for (const auto& f : j["files_read"])
    CHECK(f != "basis.rbm");

  CHECK(romkit_cli({"online", "--model", model, "--mu", "0.5,2,1"}).code == 2);
  CHECK(romkit_cli({"online", "--model", model, "--mu", "0.5,2,x,1"}).code == 2);
  CHECK(romkit_cli({"online", "--model", (dir / "nothing").string(), "--mu", "1,1,1,1"}).code == 2);

  const std::string csv = (dir / "v.csv").string();
  const Run val = romkit_cli({"validate", "--model", model, "--samples", "20", "--seed", "11", "--out", csv});
  CHECK(val.code == 0);
  CHECK(val.out.find("eff_en min/median/max") != std::string::npos);
  CHECK(val.out.find("PASS") != std::string::npos);
  CHECK(parse_csv(read_file(csv)).rows.size() == 20);
  CHECK(romkit_cli({"validate", "--model", model, "--samples", "0"}).code == 2);

  const std::string svg = (dir / "d.svg").string();
  CHECK(romkit_cli({"report", "--model", model, "--out", svg}).code == 0);
  CHECK(read_file(svg).find("log10") != std::string::npos);
  CHECK(romkit_cli({"report", "--csv", csv, "--out", (dir / "h.svg").string()}).code == 0);
  write_file(dir / "empty.csv", "");
  CHECK(romkit_cli({"report", "--csv", (dir / "empty.csv").string(), "--out", svg}).code == 2);
}

TEST_CASE("POD offline with an energy criterion")
{
  const auto dir = oracle::scratch_dir("cli-pod");
  const Run off = romkit_cli({"offline", "--blocks", "2", "--mesh-n", "8", "--method", "pod", "--snapshots", "49",
                              "--energy", "1e-8", "--out", (dir / "m").string()});
  REQUIRE_MESSAGE(off.code == 0, off.err);
  const auto s = nlohmann::json::parse(off.out);
  const LoadedModel m = load_model(dir / "m");
  const auto& spectrum = std::get<PodSpectrum>(m.archive.basis.provenance);
  const Eigen::Index n = s["n"].get<Eigen::Index>();
  const double total = spectrum.eigenvalues.sum();
  CHECK(spectrum.eigenvalues.head(n).sum() >= (1 - 1e-8) * total);
  CHECK(spectrum.eigenvalues.head(n - 1).sum() < (1 - 1e-8) * total);
}

TEST_CASE("configuration errors exit with 2")
{
  const auto dir = oracle::scratch_dir("cli-errors");
  const Run r = romkit_cli({"offline", "--blocks", "3", "--mesh-n", "16", "--out", (dir / "m").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("B must divide n") != std::string::npos);
  CHECK(romkit_cli({"offline"}).code == 2);
  CHECK(romkit_cli({"frobnicate"}).code == 2);
  CHECK(romkit_cli({}).code == 2);
  CHECK(romkit_cli({"offline", "--method", "pod", "--energy", "1e-3", "--n", "2", "--mesh-n", "4", "--out",
                    (dir / "m").string()}).code == 2);
  CHECK(romkit_cli({"offline", "--method", "pod", "--n", "500", "--mesh-n", "4", "--out", (dir / "m").string()}).code == 2);
  CHECK(romkit_cli({"--help"}).code == 0);
}

TEST_CASE("sweep of the one-block model follows 1/mu")
{
  const auto dir = oracle::scratch_dir("cli-sweep");
  const std::string model = (dir / "b1").string();
  REQUIRE(romkit_cli({"offline", "--blocks", "1", "--mesh-n", "16", "--method", "greedy", "--train", "20", "--out", model}).code == 0);
  const std::string csv = (dir / "s.csv").string();
  REQUIRE(romkit_cli({"sweep", "--model", model, "--count", "25", "--out", csv}).code == 0);
  const CsvTable t = parse_csv(read_file(csv));
  REQUIRE(t.rows.size() == 25);
  CHECK(t.header == std::vector<std::string>{"mu_1", "s_rb", "eta_s"});
  for (const auto& row : t.rows)
    CHECK(std::stod(row[0]) * std::stod(row[1]) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("fom dumps the truth solution")
{
  const auto dir = oracle::scratch_dir("cli-fom");
  const std::string out = (dir / "u.rbm").string();
  const Run r = romkit_cli({"fom", "--blocks", "1", "--mesh-n", "4", "--mu", "2", "--out", out});
  REQUIRE(r.code == 0);
  CHECK(nlohmann::json::parse(r.out)["s"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  const Matrix u = read_payload(out);
  CHECK(u.rows() == 20);
  CHECK(u.cols() == 1);
  CHECK(u(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}
