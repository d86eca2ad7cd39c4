#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apiso/domain.hpp"
#include "apiso/integrate.hpp"
#include "apiso/laurent.hpp"

namespace apiso {

/// A finite monomial span standing in for A^p(D).
struct BasisSpec {
  std::vector<MultiIndex> indices;
  std::string domain_label;
  double p = 2.0;

  /// sum_k c_k z^{indices[k]}.
  LaurentPolynomial combination(const std::vector<cplx>& coefficients) const;
};

/// Validates distinctness and finiteness of every p-norm (closed forms on
/// catalog domains). Throws InvalidArgument naming the offending index.
BasisSpec make_basis(const BoundedDomain& domain, std::vector<MultiIndex> indices, double p);

/// All exponents with each coordinate in [min_exp, degree].
std::vector<MultiIndex> tensor_degree_indices(std::size_t n, int degree, int min_exp = 0);

struct OptimizerReport {
  int iterations = 0;
  double final_gradient_norm = 0.0;
  int restarts = 0;
  bool converged = true;
};

struct KernelEstimate {
  double value = 0.0;
  Point z;
  BasisSpec basis;
  OptimizerReport optimizer_report;
  bool is_lower_bound = true;  ///< sup over a finite span
  std::string method;          ///< "gram" or "min_norm"
  double min_norm = 0.0;       ///< min ||phi||_p subject to phi(z) = 1
  std::vector<cplx> coefficients;  ///< minimizer in basis coordinates
};

/// sum_alpha |z^alpha|^2 / ||z^alpha||_2^2 (monomials are L^2-orthogonal on Reinhardt domains).
KernelEstimate bergman2_gram(const BoundedDomain& domain, const BasisSpec& basis, PointView z);

struct KernelConfig {
  int max_iterations = 100;
  double tol = 1e-10;  ///< gradient norm on the constraint slice, relative to the objective
  int restarts = 4;    ///< random restarts for p < 1
  std::uint64_t seed = 0;
  QuadratureConfig quadrature;
  /// Feasible or rescalable starting coefficients in basis coordinates.
  std::optional<std::vector<cplx>> warm_start;
};

/// min ||phi||_p over phi in span(basis) with phi(z) = 1, by damped Newton on the
/// affine slice with a smoothed integrand; value = 1 / min^2.
KernelEstimate pbergman_min_norm(const BoundedDomain& domain, const BasisSpec& basis, PointView z, double p,
                                 const KernelConfig& cfg = {});

struct BoundaryProbeRow {
  KernelEstimate estimate;
  double boundary_distance = 0.0;
  double scaled = 0.0;  ///< value * boundary_distance^2
};

std::vector<BoundaryProbeRow> boundary_probe(const BoundedDomain& domain, const std::vector<Point>& path,
                                             const BasisSpec& basis, double p, const KernelConfig& cfg = {});

}  // namespace apiso
