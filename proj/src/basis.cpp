#include "romkit/basis.hpp"

#include "romkit/error.hpp"
#include "romkit/fnv.hpp"

namespace romkit {

const char* to_string(StoppingReason reason)
{
  switch (reason) {
  case StoppingReason::Tolerance: return "tolerance";
  case StoppingReason::NMax: return "n_max";
  case StoppingReason::Stagnation: return "stagnation";
  }
  return "unknown";
}

StoppingReason stopping_reason_from_string(const std::string& s)
{
  if (s == "tolerance")
    return StoppingReason::Tolerance;
  if (s == "n_max")
    return StoppingReason::NMax;
  if (s == "stagnation")
    return StoppingReason::Stagnation;
  throw FormatError("unknown stopping reason '" + s + "'");
}

std::uint64_t ReducedBasis::Fnv1aSeed()
{
  return Fnv1a::kOffset;
}

ReducedBasis::ReducedBasis(Eigen::Index n_dofs) : vectors_(n_dofs, 0) {}

void ReducedBasis::append(const Vector& xi)
{
  if (xi.size() != n_dofs())
    throw ConfigError("basis vector has length " + std::to_string(xi.size()) + ", expected " +
                      std::to_string(n_dofs()));
  const Eigen::Index n = size();
  vectors_.conservativeResize(Eigen::NoChange, n + 1);
  vectors_.col(n) = xi;
  const std::uint64_t next = Fnv1a(prefix_fingerprints_.back())
                                 .update(xi.data(), static_cast<std::size_t>(xi.size()) * sizeof(double))
                                 .digest();
  prefix_fingerprints_.push_back(next);
}

std::uint64_t ReducedBasis::fingerprint(Eigen::Index n) const
{
  if (n < 0 || n > size())
    throw ConfigError("basis prefix " + std::to_string(n) + " out of range");
  return prefix_fingerprints_[static_cast<std::size_t>(n)];
}

ReducedBasis ReducedBasis::truncated(Eigen::Index n) const
{
  if (n < 0 || n > size())
    throw ConfigError("cannot truncate a basis of size " + std::to_string(size()) + " to " +
                      std::to_string(n));
  ReducedBasis out;
  out.vectors_ = vectors_.leftCols(n);
  out.prefix_fingerprints_.assign(prefix_fingerprints_.begin(),
                                  prefix_fingerprints_.begin() + n + 1);
  out.provenance = provenance;
  return out;
}

Matrix gram_matrix(const AffineProblem& problem, const ReducedBasis& basis)
{
  const Matrix xv = problem.x * basis.vectors();
  return basis.vectors().transpose() * xv;
}

double orthonormality_error(const AffineProblem& problem, const ReducedBasis& basis)
{
  if (basis.size() == 0)
    return 0.0;
  const Matrix g = gram_matrix(problem, basis);
  return (g - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

} // namespace romkit
