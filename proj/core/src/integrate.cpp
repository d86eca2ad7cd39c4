#include "apiso/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "apiso/rng.hpp"

namespace apiso {

std::string to_string(NormMethod m) {
  switch (m) {
    case NormMethod::closed_form: return "closed_form";
    case NormMethod::quadrature: return "quadrature";
    case NormMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

namespace {

[[noreturn]] void diverges(const std::string& where, const MultiIndex& alpha, double p, const std::string& why) {
  std::ostringstream os;
  os << "integral of |z^alpha|^p diverges on " << where << " for alpha = (";
  for (std::size_t i = 0; i < alpha.size(); ++i) os << (i ? "," : "") << alpha[i];
  os << "), p = " << p << ": " << why;
  throw DivergentIntegral(os.str());
}

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double factor_integral(const DomainSpec& s, const MultiIndex& alpha, double p) {
  const std::string where = s.label();
  switch (s.kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc: {
      const double e = p * alpha[0] + 2.0;
      if (!(e > 0.0)) diverges(where, alpha, p, "need p*alpha + 2 > 0");
      return 2.0 * kPi * std::pow(s.radii[0], e) / e;
    }
    case DomainSpec::Kind::polydisc: {
      double v = 1.0;
      for (std::size_t j = 0; j < s.n; ++j) {
        const double e = p * alpha[j] + 2.0;
        if (!(e > 0.0)) diverges(where, alpha, p, "need p*alpha_j + 2 > 0 in every coordinate");
        v *= 2.0 * kPi * std::pow(s.radii[j], e) / e;
      }
      return v;
    }
    case DomainSpec::Kind::ball: {
      double log_v = static_cast<double>(s.n) * std::log(kPi);
      double total = 0.0;
      for (std::size_t j = 0; j < s.n; ++j) {
        const double a = p * alpha[j] / 2.0 + 1.0;
        if (!(a > 0.0)) diverges(where, alpha, p, "need p*alpha_j/2 + 1 > 0 in every coordinate");
        log_v += std::lgamma(a);
        total += p * alpha[j];
      }
      log_v -= std::lgamma(static_cast<double>(s.n) + total / 2.0 + 1.0);
      log_v += (2.0 * static_cast<double>(s.n) + total) * std::log(s.radius);
      return std::exp(log_v);
    }
    case DomainSpec::Kind::hartogs: {
      const double e2 = p * alpha[1] + 2.0;
      if (!(e2 > 0.0)) diverges(where, alpha, p, "need p*alpha_2 + 2 > 0");
      const double e1 = p * alpha[0] + s.k * e2 + 2.0;
      if (!(e1 > 0.0)) diverges(where, alpha, p, "need p*alpha_1 + k(p*alpha_2 + 2) + 2 > 0");
      return 4.0 * kPi * kPi / (e2 * e1);
    }
    case DomainSpec::Kind::fk_ball_prime: {
      const double e2 = p * alpha[1] + 2.0;
      if (!(e2 > 0.0)) diverges(where, alpha, p, "need p*alpha_2 + 2 > 0");
      const double a = (p * alpha[0] + s.k * e2 + 2.0) / 2.0;
      const double b = (p * alpha[1] + 4.0) / 2.0;
      if (!(a > 0.0)) diverges(where, alpha, p, "need p*alpha_1 + k(p*alpha_2 + 2) + 2 > 0");
      return 4.0 * kPi * kPi / e2 * 0.5 * std::exp(log_beta(a, b));
    }
    case DomainSpec::Kind::product: break;
  }
  throw UnsupportedDomain("no closed form for " + where);
}

}  // namespace

double monomial_integral_closed(const DomainSpec& spec, const MultiIndex& alpha, double p) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  if (alpha.size() != spec.dimension()) {
    throw InvalidArgument("exponent has " + std::to_string(alpha.size()) + " entries, domain " + spec.label() +
                          " has dimension " + std::to_string(spec.dimension()));
  }
  double v = 1.0;
  std::size_t offset = 0;
  for (const auto& f : spec.flatten()) {
    const std::size_t d = f.dimension();
    MultiIndex sub(alpha.begin() + static_cast<std::ptrdiff_t>(offset),
                   alpha.begin() + static_cast<std::ptrdiff_t>(offset + d));
    v *= factor_integral(f, sub, p);
    offset += d;
  }
  return v;
}

PNormResult monomial_norm_closed(const BoundedDomain& domain, const MultiIndex& alpha, double p) {
  if (!domain.spec()) throw UnsupportedDomain("closed forms need a catalog domain, got " + domain.label());
  PNormResult r;
  r.p = p;
  r.method = NormMethod::closed_form;
  r.integral = monomial_integral_closed(*domain.spec(), alpha, p);
  r.value = std::pow(r.integral, 1.0 / p);
  return r;
}

PNormResult norm_closed(const BoundedDomain& domain, const LaurentPolynomial& f, double p) {
  if (f.is_zero()) {
    PNormResult r;
    r.p = p;
    return r;
  }
  if (f.is_monomial()) {
    const auto& [alpha, c] = f.single_term();
    PNormResult r = monomial_norm_closed(domain, alpha, p);
    r.value *= std::abs(c);
    r.integral *= std::pow(std::abs(c), p);
    return r;
  }
  if (p != 2.0) throw UnsupportedDomain("closed form needs a single monomial unless p = 2");
  PNormResult r;
  r.p = p;
  for (const auto& [alpha, c] : f.terms()) {
    r.integral += std::norm(c) * monomial_norm_closed(domain, alpha, 2.0).integral;
  }
  r.value = std::sqrt(r.integral);
  return r;
}

// ---------------------------------------------------------------------------
// Monte Carlo

std::vector<PNormResult> mc_norm_batch(const BoundedDomain& domain, const std::vector<HoloFunction>& fs, double p,
                                       std::uint64_t samples, std::uint64_t seed) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  if (samples < 1000) throw InvalidArgument("Monte Carlo needs at least 1000 samples");
  const std::size_t n = domain.dimension();
  const std::size_t kf = fs.size();
  for (const auto& f : fs) {
    if (f.dimension() != n) throw InvalidArgument("integrand dimension does not match the domain");
  }
  constexpr std::uint64_t kChunk = 1u << 14;
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;
  const auto& box = domain.bounding_box();
  const double vol = box.volume();

  struct Acc {
    std::vector<double> sum, sumsq, max;
    bool pole_hit = false;
  };
  std::vector<Acc> acc(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Stream rng(seed, StreamTag::mc_norm, c);
    Acc& a = acc[c];
    a.sum.assign(kf, 0.0);
    a.sumsq.assign(kf, 0.0);
    a.max.assign(kf, 0.0);
    const std::uint64_t count = std::min<std::uint64_t>(kChunk, samples - c * kChunk);
    Point z(n);
    for (std::uint64_t s = 0; s < count; ++s) {
      for (std::size_t j = 0; j < n; ++j) {
        z[j] = cplx(rng.uniform(box.re[j].lo, box.re[j].hi), rng.uniform(box.im[j].lo, box.im[j].hi));
      }
      if (!domain.contains(z)) continue;
      for (std::size_t i = 0; i < kf; ++i) {
        double y = 0.0;
        try {
          const cplx v = fs[i](z);
          y = vol * (p == 2.0 ? std::norm(v) : std::pow(std::abs(v), p));
        } catch (const PoleError&) {
          a.pole_hit = true;
        }
        a.sum[i] += y;
        a.sumsq[i] += y * y;
        a.max[i] = std::max(a.max[i], y);
      }
    }
  });

  std::vector<PNormResult> out(kf);
  const double nn = static_cast<double>(samples);
  for (std::size_t i = 0; i < kf; ++i) {
    double sum = 0.0, sumsq = 0.0, mx = 0.0;
    bool pole = false;
    for (const auto& a : acc) {
      sum += a.sum[i];
      sumsq += a.sumsq[i];
      mx = std::max(mx, a.max[i]);
      pole = pole || a.pole_hit;
    }
    const double mean = sum / nn;
    const double var = std::max(0.0, (sumsq - sum * sum / nn) / (nn - 1.0));
    PNormResult& r = out[i];
    r.p = p;
    r.method = NormMethod::monte_carlo;
    r.samples_or_nodes = samples;
    r.seed = seed;
    r.integral = mean;
    r.integral_std_error = std::sqrt(var / nn);
    r.value = std::pow(mean, 1.0 / p);
    r.std_error = mean > 0.0 ? (1.0 / p) * std::pow(mean, 1.0 / p - 1.0) * r.integral_std_error : 0.0;
    if (sum > 0.0 && mx / sum > 0.01) {
      r.warning = "pole proximity: one sample carries over 1% of the integral; |f|^p is heavy-tailed, prefer quadrature";
    } else if (pole) {
      r.warning = "pole proximity: a sample landed on a pole of f";
    }
  }
  return out;
}

PNormResult mc_norm(const BoundedDomain& domain, const HoloFunction& f, double p, std::uint64_t samples,
                    std::uint64_t seed) {
  return mc_norm_batch(domain, {f}, p, samples, seed).front();
}

}  // namespace apiso
