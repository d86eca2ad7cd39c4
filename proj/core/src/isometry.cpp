#include "apiso/isometry.hpp"

#include <algorithm>
#include <cmath>

namespace apiso {

CompositionIsometry::CompositionIsometry(BoundedDomain source, BoundedDomain target, HoloMapExpr G,
                                         HoloFunction weight, double p, cplx lambda)
    : source_(std::move(source)), target_(std::move(target)), G_(std::move(G)), weight_(std::move(weight)), p_(p),
      lambda_(lambda) {
  if (!(p_ > 0.0)) throw InvalidArgument("p must be positive");
  if (std::abs(std::abs(lambda_) - 1.0) > 1e-12) throw InvalidArgument("lambda must be unimodular");
  if (G_.dimension() != target_.dimension() || source_.dimension() != target_.dimension()) {
    throw InvalidArgument("map dimension must match source and target domains");
  }
  if (weight_.dimension() != target_.dimension()) throw InvalidArgument("weight must live on the target domain");
}

CompositionIsometry CompositionIsometry::from_map(BoundedDomain source, BoundedDomain target, HoloMapExpr G, double p,
                                                  cplx lambda) {
  HoloFunction w = weight_function(G, p);
  return CompositionIsometry(std::move(source), std::move(target), std::move(G), std::move(w), p, lambda);
}

bool CompositionIsometry::is_exact() const { return weight_.laurent() != nullptr && G_.as_monomial().has_value(); }

LaurentPolynomial CompositionIsometry::apply(const LaurentPolynomial& phi) const {
  const auto mono = G_.as_monomial();
  if (!mono || !weight_.laurent()) {
    throw InvalidArgument("exact application needs a monomial map and a Laurent weight");
  }
  return compose(phi, *mono) * (*weight_.laurent()) * lambda_;
}

HoloFunction CompositionIsometry::apply(const HoloFunction& phi) const {
  if (phi.laurent() && is_exact()) return HoloFunction(apply(*phi.laurent()));
  return HoloFunction(
      target_.dimension(),
      [phi, G = G_, w = weight_, lambda = lambda_](PointView z) { return lambda * phi(G(z)) * w(z); },
      "T(" + phi.label() + ")");
}

CompositionIsometry CompositionIsometry::inverse() const {
  HoloMapExpr F = G_.inverse();
  HoloFunction wF = weight_function(F, p_);
  cplx kappa = 1.0;
  if (is_exact() && wF.laurent()) {
    const LaurentPolynomial prod = compose(*weight_.laurent(), *F.as_monomial()) * (*wF.laurent());
    if (prod.is_monomial()) {
      const auto& [alpha, c] = prod.single_term();
      if (std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; })) kappa = c;
    }
  }
  return CompositionIsometry(target_, source_, std::move(F), std::move(wF), p_, 1.0 / (lambda_ * kappa));
}

CompositionIsometry CompositionIsometry::with_weight(HoloFunction weight) const {
  return CompositionIsometry(source_, target_, G_, std::move(weight), p_, lambda_);
}

CompositionIsometry counterexample_isometry_with_exponent(int k, int m, int weight_exponent) {
  if (k < 1 || m < 1) throw InvalidArgument("k and m must be positive integers");
  const double p = 2.0 * k / m;
  BoundedDomain D1 =
      make_catalog_domain(DomainSpec::product({DomainSpec::ball(2), DomainSpec::hartogs(k)})).with_exclusions({0});
  BoundedDomain D2 =
      make_catalog_domain(DomainSpec::product({DomainSpec::fk_ball_prime(k), DomainSpec::polydisc(2, {})}))
          .with_exclusions({2});
  LaurentPolynomial w = LaurentPolynomial::monomial({-weight_exponent, 0, weight_exponent, 0});
  return CompositionIsometry(std::move(D1), std::move(D2), HoloMapExpr(counterexample_G(k)), HoloFunction(w), p);
}

CompositionIsometry counterexample_isometry(int k, int m) {
  CompositionIsometry T = counterexample_isometry_with_exponent(k, m, m);
  // The packaged weight must be the Laurent branch of J_G^{2/p}.
  if (!(weight_branch(T.map(), T.p()) == *T.weight().laurent())) {
    throw Error("internal: weight (w1^-1 w3)^m is not the branch of J_G^{2/p}");
  }
  return T;
}

CompositionIsometry identity_isometry(const BoundedDomain& domain, double p) {
  return CompositionIsometry::from_map(domain, domain, HoloMapExpr(MonomialMap::identity(domain.dimension())), p);
}

IsometryVerification verify_isometry(const CompositionIsometry& T, const std::vector<LaurentPolynomial>& tests,
                                     NormMethod method, std::uint64_t samples, std::uint64_t seed) {
  IsometryVerification out;
  out.method = method;
  const double p = T.p();
  if (method == NormMethod::closed_form) {
    for (const auto& phi : tests) {
      IsometryTestRow row;
      row.test = phi;
      row.source_norm = norm_closed(T.source(), phi, p).value;
      row.target_norm = norm_closed(T.target(), T.apply(phi), p).value;
      row.relative_discrepancy = std::abs(row.target_norm - row.source_norm) / row.source_norm;
      out.max_discrepancy = std::max(out.max_discrepancy, row.relative_discrepancy);
      out.rows.push_back(std::move(row));
    }
    return out;
  }
  std::vector<HoloFunction> src, tgt;
  for (const auto& phi : tests) {
    src.emplace_back(phi);
    tgt.push_back(T.apply(HoloFunction(phi)));
  }
  std::vector<PNormResult> a, b;
  if (method == NormMethod::monte_carlo) {
    a = mc_norm_batch(T.source(), src, p, samples, seed);
    b = mc_norm_batch(T.target(), tgt, p, samples, seed);
  } else {
    for (std::size_t i = 0; i < tests.size(); ++i) {
      a.push_back(quadrature_norm(T.source(), tests[i], p));
      if (!tgt[i].laurent()) throw UnsupportedDomain("quadrature verification needs an exact operator");
      b.push_back(quadrature_norm(T.target(), *tgt[i].laurent(), p));
    }
  }
  for (std::size_t i = 0; i < tests.size(); ++i) {
    IsometryTestRow row;
    row.test = tests[i];
    row.source_norm = a[i].value;
    row.target_norm = b[i].value;
    row.source_std_error = a[i].std_error;
    row.target_std_error = b[i].std_error;
    row.relative_discrepancy = std::abs(row.target_norm - row.source_norm) / row.source_norm;
    out.max_discrepancy = std::max(out.max_discrepancy, row.relative_discrepancy);
    out.rows.push_back(std::move(row));
  }
  return out;
}

std::vector<LaurentPolynomial> admissible_monomial_battery(const CompositionIsometry& T, std::size_t count,
                                                           std::uint64_t seed, int max_abs_exponent) {
  if (!T.source().spec()) throw UnsupportedDomain("battery needs a catalog source domain");
  Stream rng(seed, StreamTag::test_points);
  const std::size_t n = T.source().dimension();
  std::vector<LaurentPolynomial> out;
  const int span = 2 * max_abs_exponent + 1;
  for (int attempt = 0; out.size() < count && attempt < 100000; ++attempt) {
    MultiIndex alpha(n);
    for (auto& a : alpha) a = static_cast<int>(rng.bits() % static_cast<std::uint64_t>(span)) - max_abs_exponent;
    try {
      (void)monomial_integral_closed(*T.source().spec(), alpha, T.p());
    } catch (const DivergentIntegral&) {
      continue;
    }
    LaurentPolynomial f = LaurentPolynomial::monomial(alpha);
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(std::move(f));
  }
  if (out.size() < count) throw InvalidArgument("could not find enough admissible monomials");
  return out;
}

}  // namespace apiso
