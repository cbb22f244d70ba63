#include "romkit/report.hpp"

#include "romkit/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace romkit {

namespace {

std::string number(double v)
{
  if (!std::isfinite(v))
    return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string optional_number(const std::optional<double>& v)
{
  return v ? number(*v) : kIndeterminate;
}

std::string flag(bool b)
{
  return b ? "1" : "0";
}

std::string join(const std::vector<std::string>& fields)
{
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i)
      line += ',';
    line += fields[i];
  }
  return line + "\n";
}

std::vector<std::string> mu_columns(int p)
{
  std::vector<std::string> h;
  for (int i = 1; i <= p; ++i)
    h.push_back("mu_" + std::to_string(i));
  return h;
}

std::string escape_xml(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

struct Frame
{
  double width = 640, height = 420;
  double left = 70, right = 20, top = 40, bottom = 50;
  double x0, x1, y0, y1;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * (width - left - right); }
  double py(double y) const { return height - bottom - (y - y0) / (y1 - y0) * (height - top - bottom); }
};

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void open_svg(std::ostringstream& s, const Frame& f, const std::string& title, const std::string& xlabel,
              const std::string& ylabel)
{
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << f.width << "\" height=\"" << f.height
    << "\" viewBox=\"0 0 " << f.width << ' ' << f.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<text x=\"" << f.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape_xml(title)
    << "</text>\n";
  const double xa = f.left, xb = f.width - f.right, ya = f.top, yb = f.height - f.bottom;
  s << "<line x1=\"" << xa << "\" y1=\"" << yb << "\" x2=\"" << xb << "\" y2=\"" << yb << "\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << xa << "\" y1=\"" << ya << "\" x2=\"" << xa << "\" y2=\"" << yb << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = f.x0 + (f.x1 - f.x0) * i / 4.0;
    const double y = f.y0 + (f.y1 - f.y0) * i / 4.0;
    s << "<text x=\"" << fmt(f.px(x)) << "\" y=\"" << yb + 16 << "\" text-anchor=\"middle\">" << fmt(x) << "</text>\n";
    s << "<text x=\"" << xa - 6 << "\" y=\"" << fmt(f.py(y) + 4) << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
  }
  s << "<text x=\"" << (xa + xb) / 2 << "\" y=\"" << f.height - 10 << "\" text-anchor=\"middle\">"
    << escape_xml(xlabel) << "</text>\n";
  s << "<text x=\"16\" y=\"" << (ya + yb) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
    << (ya + yb) / 2 << ")\">" << escape_xml(ylabel) << "</text>\n";
}

} // namespace

std::vector<std::string> validation_header(int num_params)
{
  std::vector<std::string> h = mu_columns(num_params);
  for (const char* name :
       {"s_delta", "s_rb", "err_mu", "err_v", "eta_en", "eta_s", "eta_s_rel", "eta_v", "eta_v_rel", "eff_en",
        "eff_s", "eff_s_rel", "eff_v", "eff_v_rel", "alpha_lb", "alpha_delta", "gamma_delta", "rigorous",
        "out_of_domain", "eta_v_rel_valid", "rigor_ok", "ceilings_ok"})
    h.emplace_back(name);
  return h;
}

std::string validation_csv(const std::vector<EffectivityReport>& rows, int num_params)
{
  std::string out = join(validation_header(num_params));
  for (const auto& r : rows) {
    const Certificate& c = r.cert;
    if (c.mu.size() != num_params)
      throw ConfigError("validation row has the wrong number of parameters");
    std::vector<std::string> f;
    for (int i = 0; i < num_params; ++i)
      f.push_back(number(c.mu[i]));
    for (double v : {r.s_delta, c.s_rb, r.err_mu, r.err_v, c.eta_en, c.eta_s})
      f.push_back(number(v));
    f.push_back(c.eta_s_rel_defined ? number(c.eta_s_rel) : kIndeterminate);
    f.push_back(number(c.eta_v));
    f.push_back(number(c.eta_v_rel));
    for (const auto& e : {r.eff_en, r.eff_s, r.eff_s_rel, r.eff_v, r.eff_v_rel})
      f.push_back(optional_number(e));
    for (double v : {c.alpha_lb, r.alpha_delta, r.gamma_delta})
      f.push_back(number(v));
    for (bool b : {c.rigorous, c.out_of_domain, c.eta_v_rel_valid, r.rigor_ok, r.ceilings_ok})
      f.push_back(flag(b));
    out += join(f);
  }
  return out;
}

ValidationSummary summarize(const std::vector<EffectivityReport>& rows)
{
  ValidationSummary s;
  s.samples = rows.size();
  std::vector<double> eff;
  for (const auto& r : rows) {
    if (!r.rigor_ok)
      ++s.rigor_failures;
    if (!r.ceilings_ok)
      ++s.ceiling_failures;
    if (r.eff_en)
      eff.push_back(*r.eff_en);
    else
      ++s.indeterminate;
  }
  if (!eff.empty()) {
    std::sort(eff.begin(), eff.end());
    s.eff_en_min = eff.front();
    s.eff_en_max = eff.back();
    const std::size_t m = eff.size() / 2;
    s.eff_en_median = eff.size() % 2 ? eff[m] : 0.5 * (eff[m - 1] + eff[m]);
  }
  return s;
}

std::vector<std::string> sweep_header(int num_params)
{
  std::vector<std::string> h = mu_columns(num_params);
  h.emplace_back("s_rb");
  h.emplace_back("eta_s");
  return h;
}

std::string sweep_csv(const std::vector<Certificate>& rows, int num_params)
{
  std::string out = join(sweep_header(num_params));
  for (const auto& c : rows) {
    std::vector<std::string> f;
    for (int i = 0; i < num_params; ++i)
      f.push_back(number(c.mu[i]));
    f.push_back(number(c.s_rb));
    f.push_back(number(c.eta_s));
    out += join(f);
  }
  return out;
}

std::size_t CsvTable::column(const std::string& name) const
{
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end())
    throw ConfigError("CSV has no column '" + name + "'");
  return static_cast<std::size_t>(it - header.begin());
}

CsvTable parse_csv(const std::string& text)
{
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(l);
    while (std::getline(ls, field, ','))
      fields.push_back(field);
    if (!l.empty() && l.back() == ',')
      fields.emplace_back();
    return fields;
  };
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto fields = split(line);
    if (fields.size() != t.header.size())
      throw ConfigError("CSV row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(t.header.size()));
    t.rows.push_back(std::move(fields));
  }
  return t;
}

std::string decay_svg(const std::vector<double>& estimators, const std::string& title)
{
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < estimators.size(); ++i)
    if (std::isfinite(estimators[i]) && estimators[i] > 0.0)
      pts.emplace_back(static_cast<double>(i + 1), std::log10(estimators[i]));
  if (pts.empty())
    throw ConfigError("no positive estimator values to plot");

  Frame f;
  f.x0 = 0.0;
  f.x1 = std::max(1.0, pts.back().first);
  double lo = pts.front().second, hi = lo;
  for (const auto& p : pts) {
    lo = std::min(lo, p.second);
    hi = std::max(hi, p.second);
  }
  f.y0 = std::floor(lo);
  f.y1 = std::ceil(hi);
  if (f.y1 <= f.y0)
    f.y1 = f.y0 + 1.0;

  std::ostringstream s;
  open_svg(s, f, title, "N", "log10(max estimator)");
  s << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
  for (const auto& p : pts)
    s << fmt(f.px(p.first)) << ',' << fmt(f.py(p.second)) << ' ';
  s << "\"/>\n";
  for (const auto& p : pts)
    s << "<circle cx=\"" << fmt(f.px(p.first)) << "\" cy=\"" << fmt(f.py(p.second))
      << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
  s << "</svg>\n";
  return s.str();
}

std::string histogram_svg(const std::vector<double>& values, const std::string& title, int bins)
{
  std::vector<double> v;
  for (double x : values)
    if (std::isfinite(x))
      v.push_back(x);
  if (v.empty())
    throw ConfigError("no finite values to plot");
  if (bins < 1)
    throw ConfigError("histogram needs at least one bin");
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  double lo = *mn, hi = *mx;
  if (hi <= lo) {
    lo -= 0.5;
    hi += 0.5;
  }
  std::vector<int> counts(static_cast<std::size_t>(bins), 0);
  for (double x : v) {
    int b = static_cast<int>((x - lo) / (hi - lo) * bins);
    ++counts[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))];
  }

  Frame f;
  f.x0 = lo;
  f.x1 = hi;
  f.y0 = 0.0;
  f.y1 = *std::max_element(counts.begin(), counts.end());

  std::ostringstream s;
  open_svg(s, f, title, "effectivity", "count");
  const double w = (hi - lo) / bins;
  for (int b = 0; b < bins; ++b) {
    const double xa = f.px(lo + b * w), xb = f.px(lo + (b + 1) * w);
    const double ya = f.py(counts[static_cast<std::size_t>(b)]), yb = f.py(0.0);
    s << "<rect x=\"" << fmt(xa) << "\" y=\"" << fmt(ya) << "\" width=\"" << fmt(xb - xa) << "\" height=\""
      << fmt(yb - ya) << "\" fill=\"#ff7f0e\" stroke=\"white\"/>\n";
  }
  s << "</svg>\n";
  return s.str();
}

} // namespace romkit
