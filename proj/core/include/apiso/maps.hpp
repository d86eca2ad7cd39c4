#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "apiso/holo.hpp"
#include "apiso/laurent.hpp"

namespace apiso {

/// out_i(z) = c_i * prod_j z_j^{E_ij}.
class MonomialMap {
 public:
  MonomialMap() = default;
  MonomialMap(Eigen::MatrixXi exponents, std::vector<cplx> coefficients);
  static MonomialMap identity(std::size_t n);

  std::size_t dimension() const { return static_cast<std::size_t>(exponents_.rows()); }
  const Eigen::MatrixXi& exponents() const { return exponents_; }
  const std::vector<cplx>& coefficients() const { return coefficients_; }

  Point operator()(PointView z) const;
  /// Exact integer determinant of the exponent matrix.
  long long exponent_determinant() const;
  /// det(E) * prod c_i * z^beta with beta_j = sum_i E_ij - 1.
  LaurentPolynomial jacobian() const;
  /// Requires |det E| = 1 so that the inverse exponents are integral.
  MonomialMap inverse() const;
  /// The map z -> (*this)(inner(z)).
  MonomialMap after(const MonomialMap& inner) const;

  bool operator==(const MonomialMap& other) const;

 private:
  Eigen::MatrixXi exponents_;
  std::vector<cplx> coefficients_;
};

/// Coordinate-wise Möbius involutions z_j -> (a_j - z_j) / (1 - conj(a_j) z_j);
/// a_j = 0 leaves the coordinate unchanged.
struct MobiusMap {
  std::vector<cplx> a;

  std::size_t dimension() const { return a.size(); }
  Point operator()(PointView z) const;
  cplx jacobian(PointView z) const;
};

/// z -> U z.
struct LinearMap {
  Eigen::MatrixXcd matrix;

  std::size_t dimension() const { return static_cast<std::size_t>(matrix.rows()); }
  Point operator()(PointView z) const;
  cplx jacobian() const { return matrix.determinant(); }
};

/// out_i = z_{perm[i]}.
struct Permutation {
  std::vector<std::size_t> perm;

  std::size_t dimension() const { return perm.size(); }
  Point operator()(PointView z) const;
  MonomialMap as_monomial() const;
};

/// A chain of steps applied left to right: steps.front() acts first.
class HoloMapExpr {
 public:
  using Step = std::variant<MonomialMap, MobiusMap, LinearMap, Permutation>;

  HoloMapExpr() = default;
  explicit HoloMapExpr(std::vector<Step> steps);
  HoloMapExpr(MonomialMap m);  // NOLINT(google-explicit-constructor)

  std::size_t dimension() const;
  const std::vector<Step>& steps() const { return steps_; }

  Point operator()(PointView z) const;
  /// Chain rule: product of step Jacobians at the intermediate points.
  cplx jacobian_det(PointView z) const;
  HoloMapExpr inverse() const;
  /// The map z -> (*this)(inner(z)).
  HoloMapExpr after(const HoloMapExpr& inner) const;
  /// Collapses a chain of monomial maps and permutations to one MonomialMap.
  std::optional<MonomialMap> as_monomial() const;

 private:
  std::vector<Step> steps_;
};

cplx jacobian_det(const MonomialMap& m, PointView z);
cplx jacobian_det(const HoloMapExpr& m, PointView z);

/// Determinant of the complex Jacobian from 4th-order central differences
/// with real step h along each coordinate.
cplx jacobian_det_fd(const std::function<Point(PointView)>& f, PointView z, double h);

/// Laurent monomial z^{(2/p) beta} for J_m = c z^beta; NoBranch when (2/p) beta
/// is not integral or the Jacobian is not monomial.
LaurentPolynomial weight_branch(const MonomialMap& m, double p);
LaurentPolynomial weight_branch(const HoloMapExpr& m, double p);

/// A holomorphic g with |g|^p = |J_m|^2 for any supported chain: Laurent
/// branches for monomial steps, principal powers (1-|a|^2)^{2/p}(1-conj(a) z)^{-4/p}
/// for Möbius steps, |det U|^{2/p} for linear steps. Exact Laurent whenever the
/// chain is monomial.
HoloFunction weight_function(const HoloMapExpr& m, double p);

/// Exact pullback: each term c z^alpha becomes c prod c_i^{alpha_i} w^{E^T alpha}.
LaurentPolynomial compose(const LaurentPolynomial& outer, const MonomialMap& inner);

/// f_k(z1, z2) = (z1, z1^k z2).
MonomialMap fk_map(int k);
/// g_k(w1, w2) = (w1, w1^{-k} w2).
MonomialMap gk_map(int k);
/// F(z) = (z1, z1^k z2, z3, z3^{-k} z4).
MonomialMap counterexample_F(int k);
/// G(w) = (w1, w1^{-k} w2, w3, w3^k w4).
MonomialMap counterexample_G(int k);

}  // namespace apiso
