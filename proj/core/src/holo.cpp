#include "apiso/holo.hpp"

namespace apiso {

HoloFunction::HoloFunction(LaurentPolynomial f)
    : dimension_(f.dimension()), laurent_(std::make_shared<const LaurentPolynomial>(std::move(f))) {
  label_ = laurent_->to_string();
  eval_ = [p = laurent_](PointView z) { return (*p)(z); };
}

HoloFunction::HoloFunction(std::size_t dimension, Eval eval, std::string label)
    : dimension_(dimension), eval_(std::move(eval)), label_(std::move(label)) {}

HoloFunction operator*(const HoloFunction& a, const HoloFunction& b) {
  if (a.laurent() && b.laurent()) return HoloFunction((*a.laurent()) * (*b.laurent()));
  return HoloFunction(
      a.dimension(), [a, b](PointView z) { return a(z) * b(z); }, "(" + a.label() + ")*(" + b.label() + ")");
}

HoloFunction operator*(const HoloFunction& a, cplx c) {
  if (a.laurent()) return HoloFunction((*a.laurent()) * c);
  return HoloFunction(a.dimension(), [a, c](PointView z) { return c * a(z); }, a.label());
}

}  // namespace apiso
