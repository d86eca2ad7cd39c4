#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "apiso/domain.hpp"
#include "apiso/holo.hpp"
#include "apiso/laurent.hpp"

namespace apiso {

enum class NormMethod { closed_form, quadrature, monte_carlo };

std::string to_string(NormMethod m);

struct PNormResult {
  double value = 0.0;  ///< ||f||_p
  double p = 1.0;
  NormMethod method = NormMethod::closed_form;
  double std_error = 0.0;  ///< on value; 0 exactly for closed forms
  std::uint64_t samples_or_nodes = 0;
  std::optional<std::uint64_t> seed;
  double integral = 0.0;            ///< value^p
  double integral_std_error = 0.0;  ///< on integral
  std::string warning;              ///< empty unless a pole-proximity warning was raised
};

/// int_D |z^alpha|^p dlambda for catalog domains. Throws DivergentIntegral when
/// the reduced radial integral diverges and UnsupportedDomain without a spec.
double monomial_integral_closed(const DomainSpec& spec, const MultiIndex& alpha, double p);

PNormResult monomial_norm_closed(const BoundedDomain& domain, const MultiIndex& alpha, double p);

/// Closed form for c z^alpha, or for any Laurent polynomial at p = 2 (monomials
/// are orthogonal on Reinhardt domains).
PNormResult norm_closed(const BoundedDomain& domain, const LaurentPolynomial& f, double p);

/// Monte Carlo over `samples` uniform proposals in the bounding box.
PNormResult mc_norm(const BoundedDomain& domain, const HoloFunction& f, double p, std::uint64_t samples,
                    std::uint64_t seed);

/// Same proposals for every integrand; element i equals mc_norm(domain, fs[i], ...).
std::vector<PNormResult> mc_norm_batch(const BoundedDomain& domain, const std::vector<HoloFunction>& fs, double p,
                                       std::uint64_t samples, std::uint64_t seed);

struct QuadratureConfig {
  enum class Mapping {
    automatic,  ///< plain Gauss-Legendre when the radial integrand is polynomial, smoothed otherwise
    plain,
    smooth,  ///< t -> t^3 (10 - 15 t + 6 t^2) before Gauss-Legendre
  };
  int radial_nodes = 0;   ///< per radial variable; 0 picks a default
  int angular_nodes = 0;  ///< per angle that matters; 0 picks a default
  Mapping mapping = Mapping::automatic;
};

/// Tensor rule over a radial-profile domain: Gauss-Legendre in each modulus with
/// exact fiber limits, trapezoid in each angle. Angles listed with a single
/// node are treated as irrelevant (weight 2 pi).
class QuadratureRule {
 public:
  QuadratureRule(const BoundedDomain& domain, int radial_nodes, std::vector<int> angular_nodes, bool smooth);

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return moduli_.size() * angle_points_; }
  std::size_t radial_size() const { return moduli_.size(); }

  /// sum_q w_q h(z_q).
  double integrate(const std::function<double(PointView)>& h) const;
  /// Explicit nodes and weights; throws if the rule exceeds `limit` points.
  void materialize(std::vector<Point>& points, std::vector<double>& weights, std::size_t limit = 5'000'000) const;

 private:
  template <typename Fn>
  void for_each(Fn&& fn) const;

  std::size_t dimension_ = 0;
  std::vector<std::vector<double>> moduli_;
  std::vector<double> radial_weights_;
  std::vector<std::vector<double>> angles_;
  std::vector<double> angle_weights_;
  std::size_t angle_points_ = 1;
};

/// Plain or smoothed choice made by Mapping::automatic for |f|^p.
bool quadrature_is_polynomial(const LaurentPolynomial& f, double p);
/// Default trapezoid counts per coordinate (1 where f's modulus ignores the angle).
std::vector<int> default_angular_nodes(const LaurentPolynomial& f, double p, int requested);

/// The rule quadrature_norm would use for |f|^p under cfg (node defaults filled in).
QuadratureRule default_rule(const BoundedDomain& domain, const LaurentPolynomial& f, double p,
                            const QuadratureConfig& cfg = {});

PNormResult quadrature_norm(const BoundedDomain& domain, const LaurentPolynomial& f, double p,
                            const QuadratureConfig& cfg = {});

}  // namespace apiso
