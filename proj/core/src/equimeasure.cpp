#include <algorithm>
#include <cmath>
#include <numeric>

#include "apiso/isometry.hpp"

namespace apiso {

namespace {

constexpr std::uint64_t kChunk = 1u << 14;
constexpr std::size_t kPilotSamples = 20000;
constexpr double kFarBound = 1e3;

// Draws points z with weight w(z) such that E[w(z) u(z)] = int_D u |phi_0|^p dlambda.
class WeightedSampler {
 public:
  WeightedSampler(const BoundedDomain& domain, const HoloFunction& phi0, double p) : domain_(domain), p_(p) {
    const LaurentPolynomial* lp = phi0.laurent();
    if (lp && lp->is_monomial() && domain.spec()) {
      const auto& [alpha, c] = lp->single_term();
      try {
        total_ = std::pow(std::abs(c), p) * monomial_integral_closed(*domain.spec(), alpha, p);
        alpha_ = alpha;
        factors_ = domain.spec()->flatten();
        importance_ = true;
      } catch (const DivergentIntegral&) {
        importance_ = false;
      }
    }
    if (!importance_) phi0_ = phi0;
    volume_ = domain.bounding_box().volume();
  }

  bool importance() const { return importance_; }

  // Returns the weight; 0 marks a rejected proposal.
  double draw(Stream& rng, Point& z) const {
    if (importance_) {
      std::size_t offset = 0;
      for (const auto& f : factors_) {
        draw_factor(f, offset, rng, z);
        offset += f.dimension();
      }
      return total_;
    }
    const auto& box = domain_.bounding_box();
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = cplx(rng.uniform(box.re[j].lo, box.re[j].hi), rng.uniform(box.im[j].lo, box.im[j].hi));
    }
    if (!domain_.contains(z)) return 0.0;
    try {
      return volume_ * std::pow(std::abs(phi0_(z)), p_);
    } catch (const PoleError&) {
      return 0.0;
    }
  }

 private:
  static cplx polar(double r, Stream& rng) { return std::polar(r, 2.0 * kPi * rng.uniform()); }

  double e(std::size_t j) const { return p_ * alpha_[j]; }

  void draw_factor(const DomainSpec& f, std::size_t o, Stream& rng, Point& z) const {
    using K = DomainSpec::Kind;
    switch (f.kind) {
      case K::disc:
      case K::punctured_disc: {
        const double r = f.radii[0] * std::pow(rng.uniform_open_zero(), 1.0 / (e(o) + 2.0));
        z[o] = polar(r, rng);
        return;
      }
      case K::polydisc:
        for (std::size_t j = 0; j < f.n; ++j) {
          const double r = f.radii[j] * std::pow(rng.uniform_open_zero(), 1.0 / (e(o + j) + 2.0));
          z[o + j] = polar(r, rng);
        }
        return;
      case K::ball: {
        std::vector<double> g(f.n + 1);
        for (std::size_t j = 0; j < f.n; ++j) g[j] = rng.gamma(e(o + j) / 2.0 + 1.0);
        g[f.n] = rng.gamma(1.0);
        const double sum = std::accumulate(g.begin(), g.end(), 0.0);
        for (std::size_t j = 0; j < f.n; ++j) z[o + j] = polar(f.radius * std::sqrt(g[j] / sum), rng);
        return;
      }
      case K::hartogs: {
        const double k = f.k;
        const double r1 = std::pow(rng.uniform_open_zero(), 1.0 / (e(o) + k * (e(o + 1) + 2.0) + 2.0));
        const double r2 = std::pow(r1, k) * std::pow(rng.uniform_open_zero(), 1.0 / (e(o + 1) + 2.0));
        z[o] = polar(r1, rng);
        z[o + 1] = polar(r2, rng);
        return;
      }
      case K::fk_ball_prime: {
        const double k = f.k;
        const double s = rng.beta((e(o) + k * (e(o + 1) + 2.0)) / 2.0 + 1.0, (e(o + 1) + 4.0) / 2.0);
        const double r1 = std::sqrt(s);
        const double r2 =
            std::pow(r1, k) * std::sqrt(1.0 - s) * std::pow(rng.uniform_open_zero(), 1.0 / (e(o + 1) + 2.0));
        z[o] = polar(r1, rng);
        z[o + 1] = polar(r2, rng);
        return;
      }
      case K::product: throw Error("internal: unflattened product");
    }
  }

  const BoundedDomain& domain_;
  double p_;
  bool importance_ = false;
  double total_ = 0.0;
  double volume_ = 0.0;
  MultiIndex alpha_;
  std::vector<DomainSpec> factors_;
  HoloFunction phi0_;
};

// Ratio vector phi_j / phi_0; false when phi_0 vanishes or a member has a pole there.
bool ratios(const FunctionFamily& family, PointView z, std::vector<cplx>& out) {
  try {
    const cplx w = family.members[0](z);
    if (w == 0.0) return false;
    for (std::size_t j = 1; j < family.members.size(); ++j) out[j - 1] = family.members[j](z) / w;
  } catch (const PoleError&) {
    return false;
  }
  return true;
}

struct Weighted {
  std::vector<std::vector<double>> coords;  // 2N real coordinates per sample
  std::vector<double> weights;
};

Weighted pilot_sample(const BoundedDomain& domain, const FunctionFamily& family, double p, std::uint64_t seed) {
  WeightedSampler sampler(domain, family.weight(), p);
  Stream rng(seed, StreamTag::box_pilot, 0);
  const std::size_t N = family.size();
  Weighted out;
  Point z(domain.dimension());
  std::vector<cplx> r(N);
  for (std::size_t s = 0; s < kPilotSamples; ++s) {
    const double w = sampler.draw(rng, z);
    if (w <= 0.0 || !ratios(family, z, r)) continue;
    std::vector<double> c(2 * N);
    for (std::size_t j = 0; j < N; ++j) {
      c[2 * j] = r[j].real();
      c[2 * j + 1] = r[j].imag();
    }
    out.coords.push_back(std::move(c));
    out.weights.push_back(w);
  }
  if (out.weights.empty()) throw SamplingError("pilot sample found no points with phi_0 != 0");
  return out;
}

// Weighted quantiles of one coordinate at the given levels.
std::vector<double> quantiles(const Weighted& pilot, std::size_t coord, const std::vector<double>& levels) {
  std::vector<std::size_t> order(pilot.weights.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return pilot.coords[a][coord] < pilot.coords[b][coord]; });
  const double total = std::accumulate(pilot.weights.begin(), pilot.weights.end(), 0.0);
  std::vector<double> out;
  for (double q : levels) {
    double cum = 0.0;
    double v = pilot.coords[order.back()][coord];
    for (std::size_t i : order) {
      cum += pilot.weights[i];
      if (cum >= q * total) {
        v = pilot.coords[i][coord];
        break;
      }
    }
    out.push_back(v);
  }
  return out;
}

std::vector<RatioBox> boxes_from_pilot(const Weighted& pilot, std::size_t N, std::size_t count, std::uint64_t seed) {
  std::vector<RatioBox> out;
  const std::size_t dims = 2 * N;
  for (std::size_t b = 0; b < count; ++b) {
    Stream rng(seed, StreamTag::box_pilot, 1 + b);
    RatioBox box;
    box.re.assign(N, {-kFarBound, kFarBound});
    box.im.assign(N, {-kFarBound, kFarBound});
    std::size_t first = rng.bits() % dims;
    std::size_t second = first;
    if (dims > 1) {
      second = rng.bits() % (dims - 1);
      if (second >= first) ++second;
    }
    for (std::size_t c : {first, second}) {
      const double a = rng.uniform(0.0, 0.6);
      const double w = rng.uniform(0.2, 0.4);
      const auto q = quantiles(pilot, c, {a, a + w});
      Interval& iv = (c % 2 == 0) ? box.re[c / 2] : box.im[c / 2];
      iv = {q[0], q[1]};
    }
    out.push_back(std::move(box));
  }
  return out;
}

Verdict row_verdict(const MassEstimate& a, const MassEstimate& b, double& z) {
  const double diff = std::abs(a.mass - b.mass);
  const double sigma = std::hypot(a.std_error, b.std_error);
  const double scale = std::max(a.mass, b.mass);
  if (sigma == 0.0) {
    z = diff == 0.0 ? 0.0 : INFINITY;
    return diff <= 1e-12 * scale ? Verdict::pass : Verdict::fail;
  }
  z = diff / sigma;
  if (z >= 3.0) return Verdict::fail;
  if (sigma > 0.5 * scale) return Verdict::inconclusive;
  return Verdict::pass;
}

}  // namespace

bool RatioBox::contains(std::span<const cplx> x) const {
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j].real() >= re[j].lo && x[j].real() <= re[j].hi)) return false;
    if (!(x[j].imag() >= im[j].lo && x[j].imag() <= im[j].hi)) return false;
  }
  return true;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "PASS";
    case Verdict::fail: return "FAIL";
    case Verdict::inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

std::vector<MassEstimate> pushforward_integrals(const BoundedDomain& domain, const FunctionFamily& family,
                                                const std::vector<RatioTest>& tests, double p,
                                                std::uint64_t samples, std::uint64_t seed, StreamTag tag) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  if (family.members.size() < 2) throw InvalidArgument("family needs phi_0 and at least one more member");
  for (const auto& f : family.members) {
    if (f.dimension() != domain.dimension()) throw InvalidArgument("family dimension does not match the domain");
  }
  if (samples < 1000) throw InvalidArgument("pushforward needs at least 1000 samples");
  const WeightedSampler sampler(domain, family.weight(), p);
  const std::size_t nt = tests.size();
  const std::size_t N = family.size();
  const std::uint64_t chunks = (samples + kChunk - 1) / kChunk;

  struct Acc {
    std::vector<double> sum, sumsq, max;
  };
  std::vector<Acc> acc(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Stream rng(seed, tag, c);
    Acc& a = acc[c];
    a.sum.assign(nt, 0.0);
    a.sumsq.assign(nt, 0.0);
    a.max.assign(nt, 0.0);
    const std::uint64_t count = std::min<std::uint64_t>(kChunk, samples - c * kChunk);
    Point z(domain.dimension());
    std::vector<cplx> r(N);
    for (std::uint64_t s = 0; s < count; ++s) {
      const double w = sampler.draw(rng, z);
      if (w <= 0.0 || !ratios(family, z, r)) continue;
      for (std::size_t i = 0; i < nt; ++i) {
        const double y = w * tests[i].u(r);
        a.sum[i] += y;
        a.sumsq[i] += y * y;
        a.max[i] = std::max(a.max[i], std::abs(y));
      }
    }
  });

  std::vector<MassEstimate> out(nt);
  const double nn = static_cast<double>(samples);
  for (std::size_t i = 0; i < nt; ++i) {
    double sum = 0.0, sumsq = 0.0, mx = 0.0;
    for (const auto& a : acc) {
      sum += a.sum[i];
      sumsq += a.sumsq[i];
      mx = std::max(mx, a.max[i]);
    }
    MassEstimate& m = out[i];
    m.mass = sum / nn;
    m.std_error = std::sqrt(std::max(0.0, (sumsq - sum * sum / nn) / (nn - 1.0)) / nn);
    m.sampler = sampler.importance() ? "importance" : "uniform";
    if (sum > 0.0 && mx / sum > 0.01) m.warning = "single sample carries more than 1% of the mass";
  }
  return out;
}

MassEstimate pushforward_mass(const BoundedDomain& domain, const FunctionFamily& family, const RatioBox& box,
                              double p, std::uint64_t samples, std::uint64_t seed) {
  RatioTest t{"box", [box](std::span<const cplx> x) { return box.contains(x) ? 1.0 : 0.0; }};
  return pushforward_integrals(domain, family, {t}, p, samples, seed, StreamTag::pushforward_source).front();
}

std::vector<RatioBox> random_ratio_boxes(const CompositionIsometry& T, const FunctionFamily& family,
                                         std::size_t count, std::uint64_t seed) {
  const Weighted pilot = pilot_sample(T.source(), family, T.p(), seed);
  return boxes_from_pilot(pilot, family.size(), count, seed);
}

EquimeasureReport equimeasure_check(const CompositionIsometry& T, const FunctionFamily& family,
                                    const std::vector<RatioBox>& boxes, std::uint64_t samples, std::uint64_t seed) {
  if (samples < 100000) throw InvalidArgument("equimeasurability check needs at least 1e5 samples per side");
  const std::size_t N = family.size();
  FunctionFamily image;
  for (const auto& f : family.members) image.members.push_back(T.apply(f));

  std::vector<RatioTest> tests;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    if (boxes[b].re.size() != N || boxes[b].im.size() != N) throw InvalidArgument("box dimension mismatch");
    tests.push_back({"box" + std::to_string(b), [box = boxes[b]](std::span<const cplx> x) {
                       return box.contains(x) ? 1.0 : 0.0;
                     }});
  }

  // Smooth tests centred on pilot medians with interquartile scales.
  const Weighted pilot = pilot_sample(T.source(), family, T.p(), seed);
  std::vector<double> centre(2 * N), scale(2 * N);
  for (std::size_t c = 0; c < 2 * N; ++c) {
    const auto q = quantiles(pilot, c, {0.25, 0.5, 0.75});
    centre[c] = q[1];
    scale[c] = q[2] - q[0] > 0.0 ? q[2] - q[0] : 1.0;
  }
  auto coord = [](std::span<const cplx> x, std::size_t c) { return c % 2 == 0 ? x[c / 2].real() : x[c / 2].imag(); };
  tests.push_back({"gaussian_bump", [=](std::span<const cplx> x) {
                     double s = 0.0;
                     for (std::size_t c = 0; c < centre.size(); ++c) {
                       const double t = (coord(x, c) - centre[c]) / scale[c];
                       s += t * t;
                     }
                     return std::exp(-0.5 * s);
                   }});
  tests.push_back({"sigmoid", [=](std::span<const cplx> x) {
                     double v = 1.0;
                     for (std::size_t c = 0; c < centre.size(); ++c) {
                       v /= 1.0 + std::exp(-(coord(x, c) - centre[c]) / scale[c]);
                     }
                     return v;
                   }});

  const auto src =
      pushforward_integrals(T.source(), family, tests, T.p(), samples, seed, StreamTag::pushforward_source);
  const auto tgt =
      pushforward_integrals(T.target(), image, tests, T.p(), samples, seed, StreamTag::pushforward_target);

  EquimeasureReport rep;
  rep.samples = samples;
  rep.seed = seed;
  bool any_fail = false, any_inconclusive = false;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    EquimeasureRow row;
    row.name = tests[i].name;
    if (i < boxes.size()) row.box = boxes[i];
    row.source = src[i];
    row.target = tgt[i];
    row.verdict = row_verdict(src[i], tgt[i], row.z_score);
    any_fail = any_fail || row.verdict == Verdict::fail;
    any_inconclusive = any_inconclusive || row.verdict == Verdict::inconclusive;
    rep.rows.push_back(std::move(row));
  }
  rep.verdict = any_fail ? Verdict::fail : any_inconclusive ? Verdict::inconclusive : Verdict::pass;
  return rep;
}

FunctionFamily coordinate_family(const CompositionIsometry& T) {
  FunctionFamily fam;
  const std::size_t n = T.source().dimension();
  fam.members.push_back(T.inverse().apply(HoloFunction(LaurentPolynomial::constant(n, 1.0))));
  for (std::size_t j = 0; j < n; ++j) fam.members.emplace_back(LaurentPolynomial::coordinate(n, j));
  return fam;
}

}  // namespace apiso
