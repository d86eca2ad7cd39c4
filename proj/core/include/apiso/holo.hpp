#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "apiso/laurent.hpp"

namespace apiso {

/// A holomorphic function given either exactly as a Laurent polynomial or as
/// an evaluator (e.g. Möbius weights with fractional powers). Cheap to copy.
class HoloFunction {
 public:
  using Eval = std::function<cplx(PointView)>;

  HoloFunction() = default;
  HoloFunction(LaurentPolynomial f);  // NOLINT(google-explicit-constructor)
  HoloFunction(std::size_t dimension, Eval eval, std::string label);

  std::size_t dimension() const { return dimension_; }
  cplx operator()(PointView z) const { return eval_(z); }
  /// Exact form when available.
  const LaurentPolynomial* laurent() const { return laurent_ ? laurent_.get() : nullptr; }
  const std::string& label() const { return label_; }

  friend HoloFunction operator*(const HoloFunction& a, const HoloFunction& b);
  friend HoloFunction operator*(const HoloFunction& a, cplx c);

 private:
  std::size_t dimension_ = 0;
  Eval eval_;
  std::shared_ptr<const LaurentPolynomial> laurent_;
  std::string label_;
};

}  // namespace apiso
