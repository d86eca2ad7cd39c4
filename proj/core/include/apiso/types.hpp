#pragma once

#include <complex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace apiso {

using cplx = std::complex<double>;
using Point = std::vector<cplx>;
using PointView = std::span<const cplx>;

inline constexpr double kPi = 3.14159265358979323846;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A negative exponent met a zero coordinate.
class PoleError : public Error {
 public:
  using Error::Error;
};

class DivergentIntegral : public Error {
 public:
  using Error::Error;
};

class UnsupportedDomain : public Error {
 public:
  using Error::Error;
};

class NonInvertibleMap : public Error {
 public:
  using Error::Error;
};

/// No Laurent-monomial branch of J^{2/p} exists.
class NoBranch : public Error {
 public:
  using Error::Error;
};

class DegenerateFamily : public Error {
 public:
  using Error::Error;
};

class NoBasisSupport : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Scenario preconditions (e.g. p even) that are configuration errors.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace apiso
