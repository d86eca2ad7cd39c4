#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <memory>

#include "apiso/integrate.hpp"
#include "apiso/rng.hpp"

namespace apiso {

namespace {

struct Node {
  double t;
  double w;
};

// Gauss-Legendre on (0, 1), optionally pulled back through the quintic smoothstep.
std::vector<Node> unit_rule(int m, bool smooth) {
  std::unique_ptr<gsl_integration_fixed_workspace, decltype(&gsl_integration_fixed_free)> ws(
      gsl_integration_fixed_alloc(gsl_integration_fixed_legendre, static_cast<std::size_t>(m), 0.0, 1.0, 0.0, 0.0),
      &gsl_integration_fixed_free);
  if (!ws) throw Error("could not allocate a Gauss-Legendre rule");
  const double* xs = gsl_integration_fixed_nodes(ws.get());
  const double* ws_ = gsl_integration_fixed_weights(ws.get());
  std::vector<Node> out(static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = xs[i];
    if (smooth) {
      const double psi = x * x * x * (10.0 - 15.0 * x + 6.0 * x * x);
      const double dpsi = 30.0 * x * x * (1.0 - x) * (1.0 - x);
      out[i] = {psi, ws_[i] * dpsi};
    } else {
      out[i] = {x, ws_[i]};
    }
  }
  return out;
}

struct RadialPoint {
  std::vector<double> r;
  double w;
};

std::vector<RadialPoint> tensor(const std::vector<RadialPoint>& a, const std::vector<RadialPoint>& b) {
  std::vector<RadialPoint> out;
  out.reserve(a.size() * b.size());
  for (const auto& x : a) {
    for (const auto& y : b) {
      RadialPoint p{x.r, x.w * y.w};
      p.r.insert(p.r.end(), y.r.begin(), y.r.end());
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<RadialPoint> factor_rule(const RadialProfile& prof, const std::vector<Node>& u) {
  std::vector<RadialPoint> out;
  switch (prof.kind) {
    case RadialProfile::Kind::polydisc: {
      out.push_back({{}, 1.0});
      for (double radius : prof.radii) {
        std::vector<RadialPoint> one;
        for (const auto& nd : u) {
          const double r = radius * nd.t;
          one.push_back({{r}, radius * nd.w * r});
        }
        out = tensor(out, one);
      }
      return out;
    }
    case RadialProfile::Kind::ball: {
      // r_j ranges over (0, sqrt(R^2 - sum_{i<j} r_i^2)).
      struct Partial {
        std::vector<double> r;
        double w;
        double rem2;
      };
      std::vector<Partial> cur{{{}, 1.0, prof.radius * prof.radius}};
      for (std::size_t j = 0; j < prof.n; ++j) {
        std::vector<Partial> next;
        next.reserve(cur.size() * u.size());
        for (const auto& pt : cur) {
          const double lim = std::sqrt(std::max(0.0, pt.rem2));
          for (const auto& nd : u) {
            const double r = lim * nd.t;
            Partial q{pt.r, pt.w * lim * nd.w * r, pt.rem2 - r * r};
            q.r.push_back(r);
            next.push_back(std::move(q));
          }
        }
        cur = std::move(next);
      }
      for (auto& pt : cur) out.push_back({std::move(pt.r), pt.w});
      return out;
    }
    case RadialProfile::Kind::hartogs_graph:
    case RadialProfile::Kind::graph_with_factor: {
      const bool with_factor = prof.kind == RadialProfile::Kind::graph_with_factor;
      for (const auto& n1 : u) {
        const double r1 = n1.t;
        double lim = std::pow(r1, prof.k);
        if (with_factor) lim *= std::sqrt(std::max(0.0, 1.0 - r1 * r1));
        for (const auto& n2 : u) {
          const double r2 = lim * n2.t;
          out.push_back({{r1, r2}, n1.w * r1 * lim * n2.w * r2});
        }
      }
      return out;
    }
    case RadialProfile::Kind::product: {
      out.push_back({{}, 1.0});
      for (const auto& f : prof.factors) out = tensor(out, factor_rule(f, u));
      return out;
    }
  }
  return out;
}

int max_graph_k(const RadialProfile& prof) {
  int k = 0;
  if (prof.kind == RadialProfile::Kind::hartogs_graph || prof.kind == RadialProfile::Kind::graph_with_factor) k = prof.k;
  for (const auto& f : prof.factors) k = std::max(k, max_graph_k(f));
  return k;
}

}  // namespace

QuadratureRule::QuadratureRule(const BoundedDomain& domain, int radial_nodes, std::vector<int> angular_nodes,
                               bool smooth)
    : dimension_(domain.dimension()) {
  if (!domain.radial_profile()) throw UnsupportedDomain("quadrature needs a radial profile, got " + domain.label());
  if (radial_nodes < 1) throw InvalidArgument("quadrature needs at least one radial node");
  if (angular_nodes.size() != dimension_) throw InvalidArgument("one angular node count per coordinate is required");
  double radial_count = std::pow(static_cast<double>(radial_nodes), static_cast<double>(dimension_));
  if (radial_count > 2e7) throw InvalidArgument("quadrature rule too large (over 2e7 radial nodes)");

  const auto nodes = unit_rule(radial_nodes, smooth);
  auto pts = factor_rule(*domain.radial_profile(), nodes);
  moduli_.reserve(pts.size());
  radial_weights_.reserve(pts.size());
  for (auto& p : pts) {
    moduli_.push_back(std::move(p.r));
    radial_weights_.push_back(p.w);
  }
  for (int m : angular_nodes) {
    if (m < 1) throw InvalidArgument("angular node counts must be >= 1");
    std::vector<double> a(static_cast<std::size_t>(m));
    for (int l = 0; l < m; ++l) a[static_cast<std::size_t>(l)] = 2.0 * kPi * l / m;
    angles_.push_back(std::move(a));
    angle_weights_.push_back(2.0 * kPi / m);
    angle_points_ *= static_cast<std::size_t>(m);
  }
}

template <typename Fn>
void QuadratureRule::for_each(Fn&& fn) const {
  const std::size_t n = dimension_;
  std::vector<std::vector<cplx>> phases(n);
  double angle_w = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    for (double a : angles_[j]) phases[j].push_back(std::polar(1.0, a));
    angle_w *= angle_weights_[j];
  }
  Point z(n);
  std::vector<std::size_t> idx(n);
  for (std::size_t q = 0; q < moduli_.size(); ++q) {
    const auto& r = moduli_[q];
    const double w = radial_weights_[q] * angle_w;
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      for (std::size_t j = 0; j < n; ++j) z[j] = r[j] * phases[j][idx[j]];
      fn(static_cast<const Point&>(z), w);
      std::size_t a = 0;
      while (a < n) {
        if (++idx[a] < phases[a].size()) break;
        idx[a] = 0;
        ++a;
      }
      if (a == n) break;
    }
  }
}

double QuadratureRule::integrate(const std::function<double(PointView)>& h) const {
  double sum = 0.0;
  for_each([&](const Point& z, double w) {
    if (w != 0.0) sum += w * h(z);
  });
  return sum;
}

void QuadratureRule::materialize(std::vector<Point>& points, std::vector<double>& weights, std::size_t limit) const {
  if (size() > limit) throw InvalidArgument("quadrature rule has " + std::to_string(size()) + " nodes, over the limit");
  points.clear();
  weights.clear();
  points.reserve(size());
  weights.reserve(size());
  for_each([&](const Point& z, double w) {
    if (w == 0.0) return;
    points.push_back(z);
    weights.push_back(w);
  });
}

bool quadrature_is_polynomial(const LaurentPolynomial& f, double p) {
  if (std::fmod(p, 2.0) == 0.0) return true;
  if (!f.is_monomial()) return false;
  for (int a : f.single_term().first) {
    const double e = p * a;
    if (e != std::round(e) || std::fmod(std::round(e), 2.0) != 0.0) return false;
  }
  return true;
}

std::vector<int> default_angular_nodes(const LaurentPolynomial& f, double p, int requested) {
  const std::size_t n = f.dimension();
  std::vector<int> out(n, 1);
  if (f.terms().size() < 2) return out;
  const bool even = std::fmod(p, 2.0) == 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    int lo = 0, hi = 0;
    bool first = true;
    for (const auto& [alpha, c] : f.terms()) {
      lo = first ? alpha[j] : std::min(lo, alpha[j]);
      hi = first ? alpha[j] : std::max(hi, alpha[j]);
      first = false;
    }
    const int spread = hi - lo;
    if (spread == 0) continue;
    if (requested > 0) {
      out[j] = requested;
    } else if (even) {
      out[j] = static_cast<int>(p) * spread + 1;
    } else {
      out[j] = 8 * spread + 16;
    }
  }
  return out;
}

namespace {

int default_radial_nodes(const LaurentPolynomial& f, double p, const RadialProfile& prof, bool smooth) {
  int deg = 0;
  for (const auto& [alpha, c] : f.terms()) {
    int d = 0;
    for (int a : alpha) d += std::abs(a);
    deg = std::max(deg, d);
  }
  const int k = max_graph_k(prof);
  const double spread = p * deg * (1.0 + k) + 2.0 * (k + 2);
  const int base = smooth ? static_cast<int>(std::ceil(2.5 * spread)) + 40 : static_cast<int>(std::ceil(spread)) + 8;
  return std::clamp(base, 8, 400);
}

double quad_integral(const BoundedDomain& domain, const LaurentPolynomial& f, double p, int m,
                     const std::vector<int>& angular, bool smooth) {
  QuadratureRule rule(domain, m, angular, smooth);
  return rule.integrate([&](PointView z) {
    const cplx v = f(z);
    return p == 2.0 ? std::norm(v) : std::pow(std::abs(v), p);
  });
}

}  // namespace

QuadratureRule default_rule(const BoundedDomain& domain, const LaurentPolynomial& f, double p,
                            const QuadratureConfig& cfg) {
  if (!domain.radial_profile()) throw UnsupportedDomain("quadrature needs a radial profile, got " + domain.label());
  const bool smooth = cfg.mapping == QuadratureConfig::Mapping::smooth ||
                      (cfg.mapping == QuadratureConfig::Mapping::automatic && !quadrature_is_polynomial(f, p));
  const int m = cfg.radial_nodes > 0 ? cfg.radial_nodes : default_radial_nodes(f, p, *domain.radial_profile(), smooth);
  return QuadratureRule(domain, m, default_angular_nodes(f, p, cfg.angular_nodes), smooth);
}

PNormResult quadrature_norm(const BoundedDomain& domain, const LaurentPolynomial& f, double p,
                            const QuadratureConfig& cfg) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  if (!domain.radial_profile()) throw UnsupportedDomain("quadrature needs a radial profile, got " + domain.label());
  if (f.dimension() != domain.dimension()) throw InvalidArgument("integrand dimension does not match the domain");
  // Divergence guard: every term must be p-integrable on its own.
  if (domain.spec()) {
    for (const auto& [alpha, c] : f.terms()) (void)monomial_integral_closed(*domain.spec(), alpha, p);
  }

  PNormResult r;
  r.p = p;
  r.method = NormMethod::quadrature;
  if (f.is_zero()) return r;

  // Monomials factor over products; integrate each factor on its own.
  if (f.is_monomial() && domain.spec() && domain.spec()->kind == DomainSpec::Kind::product) {
    const auto& [alpha, c] = f.single_term();
    double integral = 1.0;
    double rel_err = 0.0;
    std::size_t offset = 0;
    std::uint64_t nodes = 0;
    for (const auto& factor : domain.spec()->flatten()) {
      const std::size_t d = factor.dimension();
      MultiIndex sub(alpha.begin() + static_cast<std::ptrdiff_t>(offset),
                     alpha.begin() + static_cast<std::ptrdiff_t>(offset + d));
      const PNormResult fr = quadrature_norm(make_catalog_domain(factor), LaurentPolynomial::monomial(sub), p, cfg);
      integral *= fr.integral;
      rel_err += fr.integral > 0.0 ? fr.integral_std_error / fr.integral : 0.0;
      nodes += fr.samples_or_nodes;
      offset += d;
    }
    integral *= std::pow(std::abs(c), p);
    r.integral = integral;
    r.integral_std_error = rel_err * integral;
    r.samples_or_nodes = nodes;
    r.value = std::pow(integral, 1.0 / p);
    r.std_error = r.value * r.integral_std_error / (p * integral);
    return r;
  }

  const bool smooth = cfg.mapping == QuadratureConfig::Mapping::smooth ||
                      (cfg.mapping == QuadratureConfig::Mapping::automatic && !quadrature_is_polynomial(f, p));
  const int m = cfg.radial_nodes > 0 ? cfg.radial_nodes : default_radial_nodes(f, p, *domain.radial_profile(), smooth);
  const auto angular = default_angular_nodes(f, p, cfg.angular_nodes);

  const double q = quad_integral(domain, f, p, m, angular, smooth);
  const int m_coarse = std::max(2, (3 * m) / 4);
  const double q_coarse = quad_integral(domain, f, p, m_coarse, angular, smooth);
  double err = std::abs(q - q_coarse);
  // Angular refinement check only where angles matter.
  if (std::any_of(angular.begin(), angular.end(), [](int a) { return a > 1; })) {
    std::vector<int> fine = angular;
    for (auto& a : fine) {
      if (a > 1) a = a + a / 2 + 1;
    }
    err = std::max(err, std::abs(q - quad_integral(domain, f, p, m, fine, smooth)));
  }
  err = std::max(err, 1e-13 * std::abs(q));

  QuadratureRule sizing(domain, m, angular, smooth);
  r.samples_or_nodes = sizing.size();
  r.integral = q;
  r.integral_std_error = err;
  r.value = std::pow(q, 1.0 / p);
  r.std_error = q > 0.0 ? r.value * err / (p * q) : err;
  return r;
}

}  // namespace apiso
