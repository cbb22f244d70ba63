#include <romkit/archive.hpp>
#include <romkit/error.hpp>
#include <romkit/report.hpp>

#include <doctest.h>

using namespace romkit;

namespace {

EffectivityReport sample_row()
{
  EffectivityReport r;
  r.cert.mu = ParameterPoint{0.5, 2.0};
  r.cert.s_rb = 1.2;
  r.cert.eta_en = 0.3;
  r.cert.eta_s = 0.09;
  r.cert.eta_s_rel = 0.075;
  r.cert.eta_v = 0.6;
  r.cert.eta_v_rel = 0.5;
  r.cert.eta_v_rel_valid = true;
  r.cert.alpha_lb = 0.5;
  r.cert.rigorous = true;
  r.s_delta = 1.25;
  r.err_mu = 0.1;
  r.err_v = 0.2;
  r.alpha_delta = 0.5;
  r.gamma_delta = 2.0;
  r.eff_en = 3.0;
  r.eff_v = 3.0;
  r.eff_v_rel = 2.5;
  return r;
}

} // namespace

TEST_CASE("validation CSV matches the golden file")
{
  const std::string golden = read_file(std::filesystem::path(ROMKIT_TEST_DATA) / "validation_p2.csv");
  CHECK(validation_csv({sample_row()}, 2) == golden);
  CHECK(validation_header(4).size() == 4 + 22);
  CHECK(validation_header(4)[0] == "mu_1");
  CHECK(validation_header(4)[4] == "s_delta");
}

TEST_CASE("CSV parsing")
{
  const CsvTable t = parse_csv(validation_csv({sample_row(), sample_row()}, 2));
  CHECK(t.rows.size() == 2);
  CHECK(t.rows[0][t.column("eff_s")] == kIndeterminate);
  CHECK(t.rows[1][t.column("eff_en")] == "3");
  CHECK_THROWS_AS(t.column("nope"), ConfigError);
  CHECK(parse_csv("").rows.empty());
  CHECK_THROWS_AS(parse_csv("a,b\n1\n"), ConfigError);
}

TEST_CASE("validation summary")
{
  std::vector<EffectivityReport> rows(3, sample_row());
  rows[1].eff_en = 1.5;
  rows[2].eff_en.reset();
  rows[2].rigor_ok = false;
  const ValidationSummary s = summarize(rows);
  CHECK(s.samples == 3);
  CHECK(s.rigor_failures == 1);
  CHECK(s.indeterminate == 1);
  CHECK(s.eff_en_min == 1.5);
  CHECK(s.eff_en_median == 2.25);
  CHECK(s.eff_en_max == 3.0);
  CHECK_FALSE(s.passed());
}

TEST_CASE("sweep CSV")
{
  Certificate c;
  c.mu = ParameterPoint{0.25};
  c.s_rb = 4.0;
  c.eta_s = 1e-20;
  CHECK(sweep_csv({c}, 1) == "mu_1,s_rb,eta_s\n0.25,4,9.9999999999999995e-21\n");
}

TEST_CASE("SVG output")
{
  const std::string d = decay_svg({1.0, 1e-2, 1e-5, 1e-7}, "decay");
  CHECK(d.rfind("<svg", 0) == 0);
  CHECK(d.find("</svg>") != std::string::npos);
  CHECK(d.find(">N<") != std::string::npos);
  CHECK(d.find("log10") != std::string::npos);
  CHECK(d.find("<polyline") != std::string::npos);
  CHECK_THROWS_AS(decay_svg({}, "x"), ConfigError);

  const std::string h = histogram_svg({1.0, 1.5, 1.5, 2.0, 7.0}, "eff", 5);
  CHECK(h.find("<rect") != std::string::npos);
  CHECK(h.find("&") == std::string::npos);
  CHECK_THROWS_AS(histogram_svg({}, "x"), ConfigError);
  CHECK(histogram_svg({2.0, 2.0}, "a < b").find("a &lt; b") != std::string::npos);
}
