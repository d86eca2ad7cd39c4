#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apiso/isometry.hpp"

namespace apiso {

/// An isometry known only through its action on functions.
struct IsometryOracle {
  BoundedDomain source;
  BoundedDomain target;
  double p = 2.0;
  std::function<HoloFunction(const HoloFunction&)> apply;

  static IsometryOracle from(const CompositionIsometry& T);
};

/// I_N(z) = (phi_j / phi_0)(z) on the source and J_N(w) = (psi_j / psi_0)(w) on
/// the target, psi_j = T(phi_j).
struct RatioMaps {
  std::size_t N = 0;
  FunctionFamily source_family;
  FunctionFamily target_family;
  /// Coordinate hyperplanes forming phi_0^{-1}(0) when phi_0 is a Laurent monomial.
  std::optional<std::vector<std::size_t>> symbolic_zero_set;

  /// Empty when phi_0 vanishes at z or some member has a pole there.
  std::optional<std::vector<cplx>> I(PointView z) const;
  std::optional<std::vector<cplx>> J(PointView w) const;
};

/// Throws DegenerateFamily when phi_0 or psi_0 vanishes on every probe point.
RatioMaps build_ratio_maps(const IsometryOracle& T, const FunctionFamily& family, std::uint64_t seed = 0);

/// phi_0 = T^{-1}(1) followed by all source monomials of total degree <= degree,
/// then the first `extra` monomials of degree + 1.
FunctionFamily default_family(const CompositionIsometry& T, int degree = 3, std::size_t extra = 0);

struct SolverConfig {
  double tol = 1e-10;  ///< on ||J_N(w) - I_N(z)|| / (1 + ||I_N(z)||)
  int starts = 16;
  int max_iterations = 60;
  std::uint64_t seed = 0;
  /// Absolute |phi_0| threshold; reconstruct_map sets it from the grid median.
  double exclusion_threshold = 0.0;
  double exclusion_relative = 1e-8;
  /// reconstruct_map retries unmapped points by continuation from this many
  /// nearest mapped grid points.
  std::size_t continuation_neighbours = 6;
};

enum class PointStatus { mapped, excluded_zero_weight, excluded_no_preimage, unresolved_budget };
std::string to_string(PointStatus s);

struct PointSolution {
  Point z;
  PointStatus status = PointStatus::unresolved_budget;
  Point w;  ///< best iterate (meaningful when mapped)
  double residual = 0.0;
  double phi0_abs = 0.0;
  int iterations = 0;
  int starts_used = 0;
};

/// Gauss-Newton on J_N(w) = I_N(z) from random target starts, with steps
/// backtracked until they stay in the target bounding box and decrease the
/// residual; only solutions inside the target count.
/// `index` selects the random stream for the starts.
PointSolution solve_point(const RatioMaps& maps, const BoundedDomain& target, PointView z, const SolverConfig& cfg,
                          std::uint64_t index = 0, std::optional<Point> warm_start = std::nullopt);

struct ReconstructionResult {
  std::vector<PointSolution> points;
  double exclusion_threshold = 0.0;
  std::size_t mapped = 0;
  std::size_t excluded_zero_weight = 0;
  std::size_t excluded_no_preimage = 0;
  std::size_t unresolved = 0;
  /// Pairs of mapped grid indices whose images coincide within tolerance.
  std::vector<std::pair<std::size_t, std::size_t>> injectivity_violations;
  /// Every zero-weight exclusion lies on the symbolic zero set and every grid
  /// point on it was excluded; empty when no symbolic zero set is known.
  std::optional<bool> exclusion_matches_symbolic;
};

ReconstructionResult reconstruct_map(const IsometryOracle& T, const FunctionFamily& family,
                                     const std::vector<Point>& grid, const SolverConfig& cfg = {});

/// Solution of solve_point as a map, for finite-difference Jacobians.
std::function<Point(PointView)> reconstructed_map(const RatioMaps& maps, const BoundedDomain& target,
                                                  const SolverConfig& cfg, Point warm_start);

struct ModulusIdentityResult {
  double max_relative_error = 0.0;
  std::size_t evaluations = 0;
  std::string warning;
};

/// max over tests and pairs (z, w = F(z)) of
/// | |T(phi)(w)| |J_F(z)|^{2/p} - |phi(z)| | / |phi(z)|.
ModulusIdentityResult verify_modulus_identity(const IsometryOracle& T,
                                              const std::vector<std::pair<Point, Point>>& pairs,
                                              const std::vector<LaurentPolynomial>& tests,
                                              const std::function<cplx(PointView)>& jacobian_F);

struct Proportionality {
  cplx lambda;
  double spread = 0.0;  ///< max pairwise |r_i - r_j| / |mean|
  std::size_t used = 0;
};

/// Ratios T(phi)(w) / phi(z) over tests with |phi(z)| above threshold.
Proportionality verify_proportionality(const IsometryOracle& T, PointView z, PointView w,
                                       const std::vector<LaurentPolynomial>& tests, double threshold = 1e-12);

}  // namespace apiso
