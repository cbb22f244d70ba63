#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <initializer_list>
#include <vector>

namespace romkit {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using SpMat = Eigen::SparseMatrix<Scalar>;

using Vector = Vec<double>;
using Matrix = Mat<double>;
using SparseMatrix = SpMat<double>;

// A point mu = (mu_1, ..., mu_p) of the parameter domain.
struct ParameterPoint
{
  Vector values;

  ParameterPoint() = default;
  explicit ParameterPoint(Vector v) : values(std::move(v)) {}
  ParameterPoint(std::initializer_list<double> v) : values(static_cast<Eigen::Index>(v.size()))
  {
    Eigen::Index i = 0;
    for (double x : v)
      values[i++] = x;
  }

  Eigen::Index size() const { return values.size(); }
  double operator[](Eigen::Index i) const { return values[i]; }
  double& operator[](Eigen::Index i) { return values[i]; }

  bool operator==(const ParameterPoint& other) const
  {
    return values.size() == other.values.size() && values == other.values;
  }
};

using ParameterSet = std::vector<ParameterPoint>;

} // namespace romkit
