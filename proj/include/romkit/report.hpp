#pragma once

#include "romkit/certify.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace romkit {

// Sentinel written in place of effectivities whose true error is not measurable.
inline constexpr const char* kIndeterminate = "indeterminate";

// Validation CSV columns, in order:
//   mu_1..mu_p, s_delta, s_rb, err_mu, err_v,
//   eta_en, eta_s, eta_s_rel, eta_v, eta_v_rel,
//   eff_en, eff_s, eff_s_rel, eff_v, eff_v_rel,
//   alpha_lb, alpha_delta, gamma_delta,
//   rigorous, out_of_domain, eta_v_rel_valid, rigor_ok, ceilings_ok
// Flags are 0/1. Numbers use 17 significant digits.
std::vector<std::string> validation_header(int num_params);
std::string validation_csv(const std::vector<EffectivityReport>& rows, int num_params);

struct ValidationSummary
{
  std::size_t samples = 0;
  std::size_t rigor_failures = 0;
  std::size_t ceiling_failures = 0;
  std::size_t indeterminate = 0;  // rows without a determinate eff_en
  double eff_en_min = 0.0;
  double eff_en_median = 0.0;
  double eff_en_max = 0.0;

  bool passed() const { return rigor_failures == 0 && ceiling_failures == 0; }
};

ValidationSummary summarize(const std::vector<EffectivityReport>& rows);

// Sweep CSV columns: mu_1..mu_p, s_rb, eta_s.
std::vector<std::string> sweep_header(int num_params);
std::string sweep_csv(const std::vector<Certificate>& rows, int num_params);

struct CsvTable
{
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a named column; throws ConfigError if absent.
  std::size_t column(const std::string& name) const;
};

CsvTable parse_csv(const std::string& text);

// Estimator decay: N on the x axis, log10 of the estimator on the y axis.
std::string decay_svg(const std::vector<double>& estimators, const std::string& title);

// Histogram of the finite values.
std::string histogram_svg(const std::vector<double>& values, const std::string& title, int bins = 20);

} // namespace romkit
