#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "apiso/types.hpp"

namespace apiso {

/// Integer exponents, negatives allowed.
using MultiIndex = std::vector<int>;

/// z^alpha with integer powers; throws PoleError when z_j = 0 meets alpha_j < 0.
cplx eval_monomial(const MultiIndex& alpha, PointView z);

int total_degree(const MultiIndex& alpha);

/// Finite sum of c_alpha z^alpha. Zero coefficients are never stored.
class LaurentPolynomial {
 public:
  using Terms = std::map<MultiIndex, cplx>;

  LaurentPolynomial() = default;
  explicit LaurentPolynomial(std::size_t dimension);

  static LaurentPolynomial constant(std::size_t dimension, cplx c);
  static LaurentPolynomial monomial(MultiIndex alpha, cplx c = 1.0);
  /// The coordinate function z_j.
  static LaurentPolynomial coordinate(std::size_t dimension, std::size_t j);

  std::size_t dimension() const { return dimension_; }
  const Terms& terms() const { return terms_; }
  bool is_zero() const { return terms_.empty(); }
  bool is_monomial() const { return terms_.size() == 1; }
  /// Single term as (exponent, coefficient); InvalidArgument unless is_monomial().
  const Terms::value_type& single_term() const;

  /// Adds c z^alpha, combining with an existing term.
  void add_term(const MultiIndex& alpha, cplx c);
  cplx coefficient(const MultiIndex& alpha) const;

  cplx operator()(PointView z) const;

  /// Coordinates on which some term carries a negative exponent.
  std::vector<std::size_t> pole_coordinates() const;
  /// For a monomial: coordinates with positive exponent, i.e. its zero hyperplanes.
  std::vector<std::size_t> zero_hyperplanes() const;

  LaurentPolynomial& operator+=(const LaurentPolynomial& other);
  LaurentPolynomial& operator-=(const LaurentPolynomial& other);
  LaurentPolynomial& operator*=(cplx c);
  friend LaurentPolynomial operator+(LaurentPolynomial a, const LaurentPolynomial& b) { return a += b; }
  friend LaurentPolynomial operator-(LaurentPolynomial a, const LaurentPolynomial& b) { return a -= b; }
  friend LaurentPolynomial operator*(LaurentPolynomial a, cplx c) { return a *= c; }
  friend LaurentPolynomial operator*(cplx c, LaurentPolynomial a) { return a *= c; }
  friend LaurentPolynomial operator*(const LaurentPolynomial& a, const LaurentPolynomial& b);

  bool operator==(const LaurentPolynomial& other) const = default;

  std::string to_string() const;

 private:
  void check_dimension(std::size_t n) const;

  std::size_t dimension_ = 0;
  Terms terms_;
};

/// Largest coefficient-wise |a_alpha - b_alpha| over the union of supports.
double max_coefficient_difference(const LaurentPolynomial& a, const LaurentPolynomial& b);

}  // namespace apiso
