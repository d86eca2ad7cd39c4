#include "oracles.hpp"

#include <cmath>
#include <numeric>

namespace oracle {

using apiso::DomainSpec;

namespace {

std::optional<double> disc_power(double R, double s) {
  if (s + 2.0 <= 0.0) return std::nullopt;
  return 2.0 * pi * std::pow(R, s + 2.0) / (s + 2.0);
}

std::optional<double> ball_power(std::size_t n, double R, const std::vector<double>& s) {
  double log_num = 0.0;
  double half_sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double a = s[j] / 2.0 + 1.0;
    if (a <= 0.0) return std::nullopt;
    log_num += std::lgamma(a);
    half_sum += s[j] / 2.0;
  }
  const double total = static_cast<double>(n) * std::log(pi) + log_num -
                       std::lgamma(static_cast<double>(n) + half_sum + 1.0) +
                       (2.0 * half_sum + 2.0 * static_cast<double>(n)) * std::log(R);
  return std::exp(total);
}

}  // namespace

std::optional<double> power_integral(const DomainSpec& spec, const std::vector<double>& s) {
  switch (spec.kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc: return disc_power(spec.radii[0], s[0]);
    case DomainSpec::Kind::polydisc: {
      double out = 1.0;
      for (std::size_t j = 0; j < spec.n; ++j) {
        auto v = disc_power(spec.radii[j], s[j]);
        if (!v) return std::nullopt;
        out *= *v;
      }
      return out;
    }
    case DomainSpec::Kind::ball: return ball_power(spec.n, spec.radius, s);
    case DomainSpec::Kind::hartogs: {
      // inner disc of radius r^k, then the outer radial integral
      const double a = s[0], b = s[1], k = spec.k;
      if (b + 2.0 <= 0.0) return std::nullopt;
      const double e = a + k * (b + 2.0) + 2.0;
      if (e <= 0.0) return std::nullopt;
      return 4.0 * pi * pi / ((b + 2.0) * e);
    }
    case DomainSpec::Kind::fk_ball_prime: {
      // w2 = w1^k u maps the ball onto the domain with Jacobian |w1|^{2k}
      const double a = s[0], b = s[1], k = spec.k;
      return ball_power(2, 1.0, {a + k * b + 2.0 * k, b});
    }
    case DomainSpec::Kind::product: {
      double out = 1.0;
      std::size_t off = 0;
      for (const auto& f : spec.factors) {
        const std::size_t n = f.dimension();
        auto v = power_integral(f, std::vector<double>(s.begin() + static_cast<long>(off),
                                                       s.begin() + static_cast<long>(off + n)));
        if (!v) return std::nullopt;
        out *= *v;
        off += n;
      }
      return out;
    }
  }
  return std::nullopt;
}

std::optional<double> monomial_integral(const DomainSpec& spec, const std::vector<int>& alpha, double p) {
  std::vector<double> s;
  for (int a : alpha) s.push_back(p * a);
  return power_integral(spec, s);
}

std::optional<double> monomial_norm(const DomainSpec& spec, const std::vector<int>& alpha, double p) {
  auto v = monomial_integral(spec, alpha, p);
  if (!v) return std::nullopt;
  return std::pow(*v, 1.0 / p);
}

bool member(const DomainSpec& spec, const Point& z) {
  switch (spec.kind) {
    case DomainSpec::Kind::disc: return std::abs(z[0]) < spec.radii[0];
    case DomainSpec::Kind::punctured_disc: return std::abs(z[0]) < spec.radii[0] && z[0] != 0.0;
    case DomainSpec::Kind::polydisc:
      for (std::size_t j = 0; j < spec.n; ++j) {
        if (!(std::abs(z[j]) < spec.radii[j])) return false;
      }
      return true;
    case DomainSpec::Kind::ball: {
      double s = 0.0;
      for (const auto& c : z) s += std::norm(c);
      return s < spec.radius * spec.radius;
    }
    case DomainSpec::Kind::hartogs:
      return std::abs(z[0]) < 1.0 && std::abs(z[1]) < std::pow(std::abs(z[0]), spec.k);
    case DomainSpec::Kind::fk_ball_prime: {
      const double r1 = std::abs(z[0]);
      if (r1 == 0.0) return false;
      const double u = std::abs(z[1]) / std::pow(r1, spec.k);
      return r1 * r1 + u * u < 1.0;
    }
    case DomainSpec::Kind::product: {
      std::size_t off = 0;
      for (const auto& f : spec.factors) {
        const std::size_t n = f.dimension();
        if (!member(f, Point(z.begin() + static_cast<long>(off), z.begin() + static_cast<long>(off + n)))) {
          return false;
        }
        off += n;
      }
      return true;
    }
  }
  return false;
}

std::vector<double> box_half_widths(const DomainSpec& spec) {
  switch (spec.kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc: return {spec.radii[0]};
    case DomainSpec::Kind::polydisc: return spec.radii;
    case DomainSpec::Kind::ball: return std::vector<double>(spec.n, spec.radius);
    case DomainSpec::Kind::hartogs:
    case DomainSpec::Kind::fk_ball_prime: return {1.0, 1.0};
    case DomainSpec::Kind::product: {
      std::vector<double> out;
      for (const auto& f : spec.factors) {
        auto h = box_half_widths(f);
        out.insert(out.end(), h.begin(), h.end());
      }
      return out;
    }
  }
  return {};
}

McEstimate mc_integral(const DomainSpec& spec, const std::function<double(const Point&)>& h, std::uint64_t samples,
                       std::uint64_t seed) {
  const auto half = box_half_widths(spec);
  double volume = 1.0;
  for (double w : half) volume *= 4.0 * w * w;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Point z(half.size());
  double sum = 0.0, sum2 = 0.0;
  for (std::uint64_t i = 0; i < samples; ++i) {
    for (std::size_t j = 0; j < half.size(); ++j) z[j] = cplx(half[j] * U(rng), half[j] * U(rng));
    const double v = member(spec, z) ? h(z) : 0.0;
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = sum / n;
  const double var = std::max(sum2 / n - mean * mean, 0.0);
  return {volume * mean, volume * std::sqrt(var / n)};
}

double disc_bergman(cplx z, double r) {
  const double t = r * r - std::norm(z);
  return r * r / (pi * t * t);
}

double disc_bergman_truncated(cplx z, int degree) {
  double s = 0.0;
  const double x = std::norm(z);
  for (int j = degree; j >= 0; --j) s = s * x + (j + 1);
  return s / pi;
}

cplx mobius(cplx a, cplx z) { return (a - z) / (1.0 - std::conj(a) * z); }

Point counterexample_F(int k, const Point& z) {
  return {z[0], std::pow(z[0], k) * z[1], z[2], std::pow(z[2], -k) * z[3]};
}

std::vector<std::vector<int>> admissible_monomials(const DomainSpec& spec, double p, std::size_t count,
                                                   std::uint64_t seed, int lo, int hi, bool finite_variance) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> E(lo, hi);
  const std::size_t n = spec.dimension();
  std::vector<std::vector<int>> out;
  for (int attempt = 0; attempt < 100000 && out.size() < count; ++attempt) {
    std::vector<int> a(n);
    for (auto& x : a) x = E(rng);
    if (!monomial_integral(spec, a, p)) continue;
    if (finite_variance && !monomial_integral(spec, a, 2.0 * p)) continue;
    out.push_back(a);
  }
  return out;
}

}  // namespace oracle
