#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apiso/domain.hpp"
#include "apiso/holo.hpp"
#include "apiso/integrate.hpp"
#include "apiso/maps.hpp"
#include "apiso/rng.hpp"

namespace apiso {

/// T(phi) = lambda * (phi o G) * g from A^p(source) to A^p(target), where
/// G maps the target onto the source (up to null sets) and |g|^p = |J_G|^2.
class CompositionIsometry {
 public:
  CompositionIsometry(BoundedDomain source, BoundedDomain target, HoloMapExpr G, HoloFunction weight, double p,
                      cplx lambda = 1.0);
  /// Weight taken from weight_function(G, p).
  static CompositionIsometry from_map(BoundedDomain source, BoundedDomain target, HoloMapExpr G, double p,
                                      cplx lambda = 1.0);

  const BoundedDomain& source() const { return source_; }
  const BoundedDomain& target() const { return target_; }
  const HoloMapExpr& map() const { return G_; }
  const HoloFunction& weight() const { return weight_; }
  double p() const { return p_; }
  cplx lambda() const { return lambda_; }

  /// Exact pullback; requires a monomial chain and a Laurent weight.
  LaurentPolynomial apply(const LaurentPolynomial& phi) const;
  /// Exact when possible, otherwise an evaluator.
  HoloFunction apply(const HoloFunction& phi) const;
  bool is_exact() const;

  /// Operator with map F = G^{-1}, weight weight_function(F, p) and the
  /// unimodular constant that makes inverse().apply(apply(phi)) == phi.
  CompositionIsometry inverse() const;

  /// Same operator with a different weight (mutation harnesses).
  CompositionIsometry with_weight(HoloFunction weight) const;

 private:
  BoundedDomain source_;
  BoundedDomain target_;
  HoloMapExpr G_;
  HoloFunction weight_;
  double p_;
  cplx lambda_;
};

/// The operator between D1 = ball(2) x hartogs(k) minus {z1 = 0} and
/// D2 = fk_ball_prime(k) x polydisc(2) minus {w3 = 0}, with G = (w1, w1^-k w2, w3, w3^k w4)
/// and weight (w1^-1 w3)^m, p = 2k/m.
CompositionIsometry counterexample_isometry(int k, int m);

/// The same operator with weight (w1^-1 w3)^e for an arbitrary exponent e.
CompositionIsometry counterexample_isometry_with_exponent(int k, int m, int weight_exponent);

/// Identity operator on a domain.
CompositionIsometry identity_isometry(const BoundedDomain& domain, double p);

struct IsometryTestRow {
  LaurentPolynomial test;
  double source_norm = 0.0;
  double target_norm = 0.0;
  double source_std_error = 0.0;
  double target_std_error = 0.0;
  double relative_discrepancy = 0.0;
};

struct IsometryVerification {
  NormMethod method = NormMethod::closed_form;
  double max_discrepancy = 0.0;
  std::vector<IsometryTestRow> rows;
};

/// max over tests of | ||T phi|| - ||phi|| | / ||phi||. DivergentIntegral from a
/// test outside A^p propagates.
IsometryVerification verify_isometry(const CompositionIsometry& T, const std::vector<LaurentPolynomial>& tests,
                                     NormMethod method, std::uint64_t samples = 1'000'000, std::uint64_t seed = 0);

/// Random monomials with finite p-norm on the operator's source.
std::vector<LaurentPolynomial> admissible_monomial_battery(const CompositionIsometry& T, std::size_t count,
                                                           std::uint64_t seed, int max_abs_exponent = 3);

// ---------------------------------------------------------------------------
// Equimeasurability

/// phi_0 followed by phi_1..phi_N.
struct FunctionFamily {
  std::vector<HoloFunction> members;

  std::size_t size() const { return members.empty() ? 0 : members.size() - 1; }
  const HoloFunction& weight() const { return members.front(); }
};

/// Axis-aligned box in C^N (real and imaginary intervals per ratio coordinate).
struct RatioBox {
  std::vector<Interval> re;
  std::vector<Interval> im;

  bool contains(std::span<const cplx> x) const;
};

/// Real-valued test function of the ratio vector (phi_1/phi_0, ..., phi_N/phi_0).
struct RatioTest {
  std::string name;
  std::function<double(std::span<const cplx>)> u;
};

struct MassEstimate {
  double mass = 0.0;
  double std_error = 0.0;
  std::string sampler;  ///< "importance" or "uniform"
  std::string warning;
};

/// int_D u(phi_1/phi_0, ...) |phi_0|^p dlambda for every u on a common sample.
/// Draws from |phi_0|^p dlambda exactly when phi_0 is a Laurent monomial with a
/// convergent closed-form total on a catalog domain, uniformly from the
/// bounding box otherwise.
std::vector<MassEstimate> pushforward_integrals(const BoundedDomain& domain, const FunctionFamily& family,
                                                const std::vector<RatioTest>& tests, double p,
                                                std::uint64_t samples, std::uint64_t seed, StreamTag tag);

MassEstimate pushforward_mass(const BoundedDomain& domain, const FunctionFamily& family, const RatioBox& box,
                              double p, std::uint64_t samples, std::uint64_t seed);

enum class Verdict { pass, fail, inconclusive };
std::string to_string(Verdict v);

struct EquimeasureRow {
  std::string name;
  std::optional<RatioBox> box;
  MassEstimate source;
  MassEstimate target;
  double z_score = 0.0;
  Verdict verdict = Verdict::pass;
};

struct EquimeasureReport {
  std::vector<EquimeasureRow> rows;
  Verdict verdict = Verdict::pass;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;
};

/// Random boxes: two of the 2N real ratio coordinates restricted to random
/// quantile intervals of a pilot sample from the source side, the rest to
/// [-1e3, 1e3].
std::vector<RatioBox> random_ratio_boxes(const CompositionIsometry& T, const FunctionFamily& family,
                                         std::size_t count, std::uint64_t seed);

/// Compares source and target masses box by box (and for a Gaussian bump and a
/// coordinate-wise sigmoid); PASS iff every difference is below 3 combined sigma.
EquimeasureReport equimeasure_check(const CompositionIsometry& T, const FunctionFamily& family,
                                    const std::vector<RatioBox>& boxes, std::uint64_t samples, std::uint64_t seed);

/// phi_0 = T^{-1}(1) and phi_j = z_j.
FunctionFamily coordinate_family(const CompositionIsometry& T);

}  // namespace apiso
