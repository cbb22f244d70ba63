#pragma once

#include <boost/multiprecision/float128.hpp>
#include <Eigen/Core>

namespace romkit {
using Quad = boost::multiprecision::float128;
}

namespace Eigen {

template <>
struct NumTraits<romkit::Quad> : GenericNumTraits<romkit::Quad>
{
  enum {
    IsInteger = 0,
    IsSigned = 1,
    IsComplex = 0,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 4,
    MulCost = 8
  };
  using Real = romkit::Quad;
  using NonInteger = romkit::Quad;
  using Nested = romkit::Quad;
  using Literal = romkit::Quad;

  static Real epsilon() { return std::numeric_limits<romkit::Quad>::epsilon(); }
  static Real dummy_precision() { return Real(1e-30); }
  static int digits10() { return 33; }
  static int digits() { return 113; }
};

} // namespace Eigen
