#include "romkit/matrix_market.hpp"

#include "romkit/error.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace romkit {

namespace {

struct Header
{
  bool coordinate = true;
  bool symmetric = false;
};

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

SparseMatrix read(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open Matrix Market file " + path.string());

  std::string line;
  if (!std::getline(in, line))
    throw ConfigError(path.string() + ": empty file");
  std::istringstream banner(line);
  std::string tag, object, format, field, symmetry;
  banner >> tag >> object >> format >> field >> symmetry;
  if (tag != "%%MatrixMarket" || lower(object) != "matrix")
    throw ConfigError(path.string() + ": missing %%MatrixMarket matrix banner");
  Header h;
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (format == "array")
    h.coordinate = false;
  else if (format != "coordinate")
    throw ConfigError(path.string() + ": unsupported format '" + format + "'");
  if (field != "real" && field != "integer" && field != "double")
    throw ConfigError(path.string() + ": unsupported field '" + field + "'");
  if (symmetry == "symmetric")
    h.symmetric = true;
  else if (symmetry != "general")
    throw ConfigError(path.string() + ": unsupported symmetry '" + symmetry + "'");

  while (std::getline(in, line))
    if (!line.empty() && line[0] != '%')
      break;
  std::istringstream size_line(line);
  long rows = 0, cols = 0, entries = 0;
  size_line >> rows >> cols;
  if (h.coordinate)
    size_line >> entries;
  if (!size_line || rows <= 0 || cols <= 0)
    throw ConfigError(path.string() + ": malformed size line");

  std::vector<Eigen::Triplet<double>> triplets;
  if (h.coordinate) {
    triplets.reserve(static_cast<std::size_t>(h.symmetric ? 2 * entries : entries));
    for (long k = 0; k < entries; ++k) {
      long i = 0, j = 0;
      double v = 0.0;
      if (!(in >> i >> j >> v))
        throw ConfigError(path.string() + ": expected " + std::to_string(entries) +
                          " entries, found " + std::to_string(k));
      if (i < 1 || i > rows || j < 1 || j > cols)
        throw ConfigError(path.string() + ": entry index out of range");
      triplets.emplace_back(i - 1, j - 1, v);
      if (h.symmetric && i != j)
        triplets.emplace_back(j - 1, i - 1, v);
    }
  } else {
    // column-major; symmetric arrays list the lower triangle only
    for (long j = 0; j < cols; ++j) {
      for (long i = h.symmetric ? j : 0; i < rows; ++i) {
        double v = 0.0;
        if (!(in >> v))
          throw ConfigError(path.string() + ": truncated array data");
        if (v == 0.0)
          continue;
        triplets.emplace_back(i, j, v);
        if (h.symmetric && i != j)
          triplets.emplace_back(j, i, v);
      }
    }
  }
  SparseMatrix a(rows, cols);
  a.setFromTriplets(triplets.begin(), triplets.end());
  a.makeCompressed();
  return a;
}

} // namespace

SparseMatrix read_matrix_market(const std::filesystem::path& path)
{
  return read(path);
}

Vector read_matrix_market_vector(const std::filesystem::path& path)
{
  const SparseMatrix a = read(path);
  if (a.cols() == 1)
    return Vector(a.col(0));
  if (a.rows() == 1)
    return Vector(a.row(0).transpose());
  throw ConfigError(path.string() + ": expected a vector, got a " + std::to_string(a.rows()) + " x " +
                    std::to_string(a.cols()) + " matrix");
}

void write_matrix_market(const std::filesystem::path& path, const SparseMatrix& a)
{
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  out << std::setprecision(17);
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it)
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
}

void write_matrix_market(const std::filesystem::path& path, const Vector& v)
{
  std::ofstream out(path);
  if (!out)
    throw ConfigError("cannot write " + path.string());
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  out << std::setprecision(17);
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out << v[i] << '\n';
}

} // namespace romkit
