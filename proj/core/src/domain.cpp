#include "apiso/domain.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "apiso/rng.hpp"

namespace apiso {

namespace {

std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void require_positive_radius(double r) {
  if (!(r > 0.0) || !std::isfinite(r)) {
    throw InvalidArgument("radius must be positive, got " + format_number(r));
  }
}

void require_k(int k) {
  if (k < 1) throw InvalidArgument("graph exponent k must be >= 1, got " + std::to_string(k));
}

double graph_factor_peak(int k) {
  // max over r in (0,1) of r^k sqrt(1 - r^2), attained at r^2 = k/(k+1)
  const double kk = static_cast<double>(k);
  return std::pow(kk / (kk + 1.0), kk / 2.0) * std::sqrt(1.0 / (kk + 1.0));
}

}  // namespace

// ---------------------------------------------------------------------------
// RadialProfile

std::size_t RadialProfile::dimension() const {
  switch (kind) {
    case Kind::polydisc: return radii.size();
    case Kind::ball: return n;
    case Kind::hartogs_graph:
    case Kind::graph_with_factor: return 2;
    case Kind::product: {
      std::size_t d = 0;
      for (const auto& f : factors) d += f.dimension();
      return d;
    }
  }
  return 0;
}

bool RadialProfile::contains(std::span<const double> r) const {
  switch (kind) {
    case Kind::polydisc:
      for (std::size_t j = 0; j < radii.size(); ++j) {
        if (!(r[j] < radii[j])) return false;
      }
      return true;
    case Kind::ball: {
      double s = 0.0;
      for (std::size_t j = 0; j < n; ++j) s += r[j] * r[j];
      return s < radius * radius;
    }
    case Kind::hartogs_graph:
      return r[0] < 1.0 && r[1] < std::pow(r[0], k);
    case Kind::graph_with_factor:
      return r[0] < 1.0 && r[1] < std::pow(r[0], k) * std::sqrt(1.0 - r[0] * r[0]);
    case Kind::product: {
      std::size_t offset = 0;
      for (const auto& f : factors) {
        const std::size_t d = f.dimension();
        if (!f.contains(r.subspan(offset, d))) return false;
        offset += d;
      }
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// DomainSpec

DomainSpec DomainSpec::disc(double r) {
  DomainSpec s;
  s.kind = Kind::disc;
  s.radii = {r};
  return s;
}

DomainSpec DomainSpec::punctured_disc(double r) {
  DomainSpec s;
  s.kind = Kind::punctured_disc;
  s.radii = {r};
  return s;
}

DomainSpec DomainSpec::polydisc(std::size_t n, std::vector<double> radii) {
  DomainSpec s;
  s.kind = Kind::polydisc;
  s.n = n;
  if (radii.empty()) radii.assign(n, 1.0);
  s.radii = std::move(radii);
  return s;
}

DomainSpec DomainSpec::ball(std::size_t n, double radius) {
  DomainSpec s;
  s.kind = Kind::ball;
  s.n = n;
  s.radius = radius;
  return s;
}

DomainSpec DomainSpec::hartogs(int k) {
  DomainSpec s;
  s.kind = Kind::hartogs;
  s.n = 2;
  s.k = k;
  return s;
}

DomainSpec DomainSpec::fk_ball_prime(int k) {
  DomainSpec s;
  s.kind = Kind::fk_ball_prime;
  s.n = 2;
  s.k = k;
  return s;
}

DomainSpec DomainSpec::product(std::vector<DomainSpec> factors) {
  DomainSpec s;
  s.kind = Kind::product;
  s.factors = std::move(factors);
  return s;
}

std::size_t DomainSpec::dimension() const {
  switch (kind) {
    case Kind::disc:
    case Kind::punctured_disc: return 1;
    case Kind::polydisc:
    case Kind::ball: return n;
    case Kind::hartogs:
    case Kind::fk_ball_prime: return 2;
    case Kind::product: {
      std::size_t d = 0;
      for (const auto& f : factors) d += f.dimension();
      return d;
    }
  }
  return 0;
}

std::string DomainSpec::label() const {
  switch (kind) {
    case Kind::disc:
      return radii.at(0) == 1.0 ? "disc" : "disc(" + format_number(radii[0]) + ")";
    case Kind::punctured_disc:
      return radii.at(0) == 1.0 ? "punctured_disc" : "punctured_disc(" + format_number(radii[0]) + ")";
    case Kind::polydisc: {
      std::string out = "polydisc(" + std::to_string(n);
      if (std::any_of(radii.begin(), radii.end(), [](double r) { return r != 1.0; })) {
        for (double r : radii) out += "," + format_number(r);
      }
      return out + ")";
    }
    case Kind::ball:
      return radius == 1.0 ? "ball(" + std::to_string(n) + ")"
                           : "ball(" + std::to_string(n) + "," + format_number(radius) + ")";
    case Kind::hartogs: return "hartogs(" + std::to_string(k) + ")";
    case Kind::fk_ball_prime: return "fk_ball_prime(" + std::to_string(k) + ")";
    case Kind::product: {
      std::string out;
      for (std::size_t i = 0; i < factors.size(); ++i) {
        if (i) out += "*";
        out += factors[i].label();
      }
      return out;
    }
  }
  return {};
}

std::vector<DomainSpec> DomainSpec::flatten() const {
  if (kind != Kind::product) return {*this};
  std::vector<DomainSpec> out;
  for (const auto& f : factors) {
    auto sub = f.flatten();
    out.insert(out.end(), sub.begin(), sub.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// BoundingBox

double BoundingBox::volume() const {
  double v = 1.0;
  for (std::size_t j = 0; j < re.size(); ++j) v *= (re[j].hi - re[j].lo) * (im[j].hi - im[j].lo);
  return v;
}

double BoundingBox::diameter() const {
  double s = 0.0;
  for (std::size_t j = 0; j < re.size(); ++j) {
    s += (re[j].hi - re[j].lo) * (re[j].hi - re[j].lo) + (im[j].hi - im[j].lo) * (im[j].hi - im[j].lo);
  }
  return std::sqrt(s);
}

bool BoundingBox::contains(PointView z) const {
  for (std::size_t j = 0; j < re.size(); ++j) {
    if (z[j].real() < re[j].lo || z[j].real() > re[j].hi) return false;
    if (z[j].imag() < im[j].lo || z[j].imag() > im[j].hi) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// BoundedDomain

BoundedDomain::BoundedDomain(std::size_t dimension, Membership membership, BoundingBox box,
                             std::string label)
    : dimension_(dimension), membership_(std::move(membership)), box_(std::move(box)),
      label_(std::move(label)) {
  if (dimension_ < 1) throw InvalidArgument("domain dimension must be >= 1");
  if (box_.re.size() != dimension_ || box_.im.size() != dimension_) {
    throw InvalidArgument("bounding box does not match the domain dimension");
  }
  for (std::size_t j = 0; j < dimension_; ++j) {
    for (const auto& iv : {box_.re[j], box_.im[j]}) {
      if (!std::isfinite(iv.lo) || !std::isfinite(iv.hi) || !(iv.lo < iv.hi)) {
        throw InvalidArgument("bounding box must be bounded and nondegenerate");
      }
    }
  }
}

bool BoundedDomain::contains(PointView z) const {
  if (z.size() != dimension_) return false;
  for (std::size_t j : exclusions_) {
    if (z[j] == cplx(0.0, 0.0)) return false;
  }
  if (!box_.contains(z)) return false;
  return membership_(z);
}

BoundedDomain BoundedDomain::with_exclusions(std::vector<std::size_t> coordinates) const {
  BoundedDomain out = *this;
  for (std::size_t c : coordinates) {
    if (c >= dimension_) throw InvalidArgument("exclusion coordinate out of range");
    if (std::find(out.exclusions_.begin(), out.exclusions_.end(), c) == out.exclusions_.end()) {
      out.exclusions_.push_back(c);
    }
  }
  std::sort(out.exclusions_.begin(), out.exclusions_.end());
  std::string suffix;
  for (std::size_t c : coordinates) suffix += "\\{z" + std::to_string(c + 1) + "=0}";
  out.label_ = label_ + suffix;
  return out;
}

BoundedDomain BoundedDomain::without_exclusions() const {
  if (spec_) {
    // Catalog punctured discs carry their puncture in the spec; rebuild with plain discs.
    DomainSpec parent = *spec_;
    auto strip = [](auto& self, DomainSpec& s) -> void {
      if (s.kind == DomainSpec::Kind::punctured_disc) s.kind = DomainSpec::Kind::disc;
      for (auto& f : s.factors) self(self, f);
    };
    strip(strip, parent);
    return make_catalog_domain(parent);
  }
  BoundedDomain out = *this;
  out.exclusions_.clear();
  return out;
}

namespace {

RadialProfile profile_of(const DomainSpec& s) {
  RadialProfile p;
  switch (s.kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc:
      p.kind = RadialProfile::Kind::polydisc;
      p.radii = {s.radii.at(0)};
      break;
    case DomainSpec::Kind::polydisc:
      p.kind = RadialProfile::Kind::polydisc;
      p.radii = s.radii;
      break;
    case DomainSpec::Kind::ball:
      p.kind = RadialProfile::Kind::ball;
      p.n = s.n;
      p.radius = s.radius;
      break;
    case DomainSpec::Kind::hartogs:
      p.kind = RadialProfile::Kind::hartogs_graph;
      p.k = s.k;
      break;
    case DomainSpec::Kind::fk_ball_prime:
      p.kind = RadialProfile::Kind::graph_with_factor;
      p.k = s.k;
      break;
    case DomainSpec::Kind::product:
      p.kind = RadialProfile::Kind::product;
      for (const auto& f : s.factors) p.factors.push_back(profile_of(f));
      break;
  }
  return p;
}

void validate(const DomainSpec& s) {
  switch (s.kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc:
      if (s.radii.size() != 1) throw InvalidArgument("disc takes exactly one radius");
      require_positive_radius(s.radii[0]);
      break;
    case DomainSpec::Kind::polydisc:
      if (s.n < 1) throw InvalidArgument("polydisc dimension must be >= 1");
      if (s.radii.size() != s.n) throw InvalidArgument("polydisc needs one radius per coordinate");
      for (double r : s.radii) require_positive_radius(r);
      break;
    case DomainSpec::Kind::ball:
      if (s.n < 1) throw InvalidArgument("ball dimension must be >= 1");
      require_positive_radius(s.radius);
      break;
    case DomainSpec::Kind::hartogs:
    case DomainSpec::Kind::fk_ball_prime:
      require_k(s.k);
      break;
    case DomainSpec::Kind::product:
      if (s.factors.empty()) throw InvalidArgument("product needs at least one factor");
      for (const auto& f : s.factors) validate(f);
      break;
  }
}

void append_box(const DomainSpec& s, BoundingBox& box) {
  auto push = [&](double half) {
    box.re.push_back({-half, half});
    box.im.push_back({-half, half});
  };
  switch (s.kind) {
    case DomainSpec::Kind::disc:
    case DomainSpec::Kind::punctured_disc: push(s.radii[0]); break;
    case DomainSpec::Kind::polydisc:
      for (double r : s.radii) push(r);
      break;
    case DomainSpec::Kind::ball:
      for (std::size_t j = 0; j < s.n; ++j) push(s.radius);
      break;
    case DomainSpec::Kind::hartogs:
      push(1.0);
      push(1.0);
      break;
    case DomainSpec::Kind::fk_ball_prime:
      push(1.0);
      push(graph_factor_peak(s.k));
      break;
    case DomainSpec::Kind::product:
      for (const auto& f : s.factors) append_box(f, box);
      break;
  }
}

void append_exclusions(const DomainSpec& s, std::size_t offset, std::vector<std::size_t>& out) {
  if (s.kind == DomainSpec::Kind::punctured_disc) out.push_back(offset);
  if (s.kind == DomainSpec::Kind::product) {
    for (const auto& f : s.factors) {
      append_exclusions(f, offset, out);
      offset += f.dimension();
    }
  }
}

}  // namespace

BoundedDomain make_catalog_domain(const DomainSpec& spec) {
  validate(spec);
  BoundedDomain d;
  d.dimension_ = spec.dimension();
  d.spec_ = spec;
  d.profile_ = profile_of(spec);
  append_box(spec, d.box_);
  append_exclusions(spec, 0, d.exclusions_);
  d.label_ = spec.label();
  d.membership_ = [profile = *d.profile_](PointView z) {
    double buf[16];
    std::vector<double> heap;
    double* r = buf;
    if (z.size() > 16) {
      heap.resize(z.size());
      r = heap.data();
    }
    for (std::size_t j = 0; j < z.size(); ++j) r[j] = std::abs(z[j]);
    return profile.contains(std::span<const double>(r, z.size()));
  };
  return d;
}

// ---------------------------------------------------------------------------
// Label parsing

namespace {

struct LabelParser {
  std::string_view text;
  std::size_t pos = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw InvalidArgument("cannot parse domain '" + std::string(text) + "': " + what);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  std::string name() {
    skip_ws();
    const std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_')) ++pos;
    if (pos == start) fail("expected a domain name");
    return std::string(text.substr(start, pos - start));
  }

  std::vector<double> args() {
    std::vector<double> out;
    skip_ws();
    if (pos >= text.size() || text[pos] != '(') return out;
    ++pos;
    while (true) {
      skip_ws();
      const char* begin = text.data() + pos;
      double v = 0.0;
      auto res = std::from_chars(begin, text.data() + text.size(), v);
      if (res.ec != std::errc()) fail("expected a number");
      out.push_back(v);
      pos += static_cast<std::size_t>(res.ptr - begin);
      skip_ws();
      if (pos < text.size() && text[pos] == ',') {
        ++pos;
        continue;
      }
      if (pos < text.size() && text[pos] == ')') {
        ++pos;
        break;
      }
      fail("expected ',' or ')'");
    }
    return out;
  }

  static int as_int(double v, const char* what) {
    if (v != std::floor(v)) throw InvalidArgument(std::string(what) + " must be an integer");
    return static_cast<int>(v);
  }

  DomainSpec factor() {
    const std::string n = name();
    const auto a = args();
    if (n == "disc") return DomainSpec::disc(a.empty() ? 1.0 : a[0]);
    if (n == "punctured_disc") return DomainSpec::punctured_disc(a.empty() ? 1.0 : a[0]);
    if (n == "polydisc") {
      if (a.empty()) fail("polydisc needs a dimension");
      const int dim = as_int(a[0], "polydisc dimension");
      if (dim < 1) throw InvalidArgument("polydisc dimension must be >= 1");
      std::vector<double> radii(a.begin() + 1, a.end());
      if (radii.empty()) radii.assign(static_cast<std::size_t>(dim), 1.0);
      return DomainSpec::polydisc(static_cast<std::size_t>(dim), radii);
    }
    if (n == "ball") {
      if (a.empty()) fail("ball needs a dimension");
      const int dim = as_int(a[0], "ball dimension");
      if (dim < 1) throw InvalidArgument("ball dimension must be >= 1");
      return DomainSpec::ball(static_cast<std::size_t>(dim), a.size() > 1 ? a[1] : 1.0);
    }
    if (n == "hartogs" || n == "fk_ball_prime") {
      if (a.size() != 1) fail(n + " needs exactly one argument k");
      const int k = as_int(a[0], "k");
      return n == "hartogs" ? DomainSpec::hartogs(k) : DomainSpec::fk_ball_prime(k);
    }
    fail("unknown domain '" + n + "'");
  }

  DomainSpec parse() {
    std::vector<DomainSpec> factors{factor()};
    skip_ws();
    while (pos < text.size() && text[pos] == '*') {
      ++pos;
      factors.push_back(factor());
      skip_ws();
    }
    if (pos != text.size()) fail("trailing characters");
    if (factors.size() == 1) return factors.front();
    return DomainSpec::product(std::move(factors));
  }
};

}  // namespace

DomainSpec parse_domain_label(std::string_view text) {
  LabelParser parser{text};
  DomainSpec spec = parser.parse();
  validate(spec);
  return spec;
}

// ---------------------------------------------------------------------------
// Boundary distance

namespace {

using RealPoint = std::vector<double>;
using RealPredicate = std::function<bool(const RealPoint&)>;

double norm(const RealPoint& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

// Smallest t along x0 + t*dir at which membership differs from `inside0`,
// resolved by bisection to tol/4. Returns +inf if no flip within tmax.
double first_flip(const RealPredicate& member, const RealPoint& x0, const RealPoint& dir, bool inside0,
                  double tol, double tmax, double hmax) {
  RealPoint x(x0.size());
  auto at = [&](double t) {
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = x0[i] + t * dir[i];
    return member(x);
  };
  double t_prev = 0.0;
  double t = std::min(tol, tmax);
  for (;;) {
    if (at(t) != inside0) {
      double lo = t_prev;
      double hi = t;
      while (hi - lo > tol / 4.0) {
        const double mid = 0.5 * (lo + hi);
        if (at(mid) != inside0) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      return hi;
    }
    if (t >= tmax) break;
    t_prev = t;
    t = std::min({2.0 * t, t + hmax, tmax});
  }
  return std::numeric_limits<double>::infinity();
}

}  // namespace

BoundaryDistance boundary_distance(const BoundedDomain& domain, PointView w, double tol) {
  if (!(tol > 0.0)) throw InvalidArgument("boundary_distance needs tol > 0");
  const std::size_t n = domain.dimension();
  if (w.size() != n) throw InvalidArgument("point dimension does not match domain");

  // Reinhardt domains: the nearest point can be taken with the same phases,
  // so the search runs on the real slice through the modulus vector.
  RealPoint x0;
  RealPredicate member;
  const auto& excl = domain.null_exclusions();
  if (domain.radial_profile()) {
    x0.resize(n);
    for (std::size_t j = 0; j < n; ++j) x0[j] = std::abs(w[j]);
    member = [&domain, &excl, n](const RealPoint& x) {
      double r[16];
      std::vector<double> heap;
      double* rp = r;
      if (n > 16) {
        heap.resize(n);
        rp = heap.data();
      }
      for (std::size_t j = 0; j < n; ++j) rp[j] = std::abs(x[j]);
      for (std::size_t j : excl) {
        if (rp[j] == 0.0) return false;
      }
      return domain.radial_profile()->contains(std::span<const double>(rp, n));
    };
  } else {
    x0.resize(2 * n);
    for (std::size_t j = 0; j < n; ++j) {
      x0[2 * j] = w[j].real();
      x0[2 * j + 1] = w[j].imag();
    }
    member = [&domain, n](const RealPoint& x) {
      Point z(n);
      for (std::size_t j = 0; j < n; ++j) z[j] = cplx(x[2 * j], x[2 * j + 1]);
      return domain.contains(z);
    };
  }

  const bool inside0 = member(x0);
  const std::size_t d = x0.size();
  const double diam = domain.bounding_box().diameter();
  const double tmax = 2.0 * diam + norm(x0);
  const double hmax = diam / 128.0;

  std::vector<RealPoint> dirs;
  for (std::size_t i = 0; i < d; ++i) {
    for (double s : {1.0, -1.0}) {
      RealPoint v(d, 0.0);
      v[i] = s;
      dirs.push_back(v);
    }
  }
  const double h = 1.0 / std::sqrt(2.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = i + 1; j < d; ++j) {
      for (double si : {1.0, -1.0}) {
        for (double sj : {1.0, -1.0}) {
          RealPoint v(d, 0.0);
          v[i] = si * h;
          v[j] = sj * h;
          dirs.push_back(v);
        }
      }
    }
  }
  Stream rng(0x5eed, StreamTag::probe_directions);
  auto random_dir = [&] {
    RealPoint v(d);
    for (auto& x : v) x = rng.normal();
    const double nv = norm(v);
    for (auto& x : v) x /= nv;
    return v;
  };
  for (int i = 0; i < 64; ++i) dirs.push_back(random_dir());

  double best = std::numeric_limits<double>::infinity();
  RealPoint best_dir;
  for (const auto& dir : dirs) {
    const double t = first_flip(member, x0, dir, inside0, tol, std::min(tmax, best), hmax);
    if (t < best) {
      best = t;
      best_dir = dir;
    }
  }

  // Compass search around the best direction; the step shrinks only when no
  // axis move improves.
  if (std::isfinite(best) && best > tol) {
    double step = 0.25;
    int moves = 0;
    while (step > 1e-7 && best > tol && moves < 4000) {
      bool improved = false;
      for (std::size_t i = 0; i < d && !improved; ++i) {
        for (double s : {1.0, -1.0}) {
          RealPoint v = best_dir;
          v[i] += s * step;
          const double nv = norm(v);
          for (auto& x : v) x /= nv;
          const double t = first_flip(member, x0, v, inside0, tol, best, hmax);
          ++moves;
          if (t < best) {
            best = t;
            best_dir = v;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
  }

  BoundaryDistance out;
  out.inside = inside0;
  out.distance = best <= tol ? 0.0 : best;
  return out;
}

// ---------------------------------------------------------------------------
// Sampling

SampleSet sample(const BoundedDomain& domain, std::uint64_t seed, std::size_t count) {
  if (count < 1) throw InvalidArgument("sample count must be >= 1");
  constexpr std::size_t kChunk = 4096;
  const std::size_t chunks = (count + kChunk - 1) / kChunk;
  const std::size_t n = domain.dimension();
  const auto& box = domain.bounding_box();

  std::vector<std::vector<Point>> per_chunk(chunks);
  std::vector<SampleStats> stats(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    Stream rng(seed, StreamTag::sampler, c);
    const std::size_t want = std::min(kChunk, count - c * kChunk);
    auto& out = per_chunk[c];
    out.reserve(want);
    SampleStats& st = stats[c];
    Point z(n);
    while (out.size() < want) {
      for (std::size_t j = 0; j < n; ++j) {
        z[j] = cplx(rng.uniform(box.re[j].lo, box.re[j].hi), rng.uniform(box.im[j].lo, box.im[j].hi));
      }
      ++st.proposals;
      if (domain.contains(z)) {
        ++st.accepted;
        out.push_back(z);
      }
      if (st.proposals >= 10'000'000 && static_cast<double>(st.accepted) * 1e6 < static_cast<double>(st.proposals)) {
        throw SamplingError("acceptance rate below 1e-6 for domain " + domain.label() +
                            " (degenerate domain or bounding box)");
      }
    }
  });

  SampleSet result;
  result.points.reserve(count);
  for (std::size_t c = 0; c < chunks; ++c) {
    result.points.insert(result.points.end(), per_chunk[c].begin(), per_chunk[c].end());
    result.stats.proposals += stats[c].proposals;
    result.stats.accepted += stats[c].accepted;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Grids and the interior-of-closure probe

namespace {

// Symmetric node set with spacing h inside [lo, hi]; always odd so that the
// center is a node.
std::vector<double> axis_nodes(const Interval& iv, double h) {
  const double center = 0.5 * (iv.lo + iv.hi);
  const double half = 0.5 * (iv.hi - iv.lo);
  auto steps = static_cast<std::size_t>(std::floor(half / h));
  std::vector<double> out;
  if (steps == 0) {
    out = {center - half / 2.0, center, center + half / 2.0};
    return out;
  }
  for (std::size_t i = 0; i <= 2 * steps; ++i) {
    out.push_back(center + (static_cast<double>(i) - static_cast<double>(steps)) * h);
  }
  return out;
}

template <typename Fn>
void for_each_tensor_point(const std::vector<std::vector<double>>& axes, std::size_t n, Fn&& fn) {
  std::vector<std::size_t> idx(axes.size(), 0);
  Point z(n);
  while (true) {
    for (std::size_t j = 0; j < n; ++j) z[j] = cplx(axes[2 * j][idx[2 * j]], axes[2 * j + 1][idx[2 * j + 1]]);
    fn(static_cast<const Point&>(z));
    std::size_t a = 0;
    while (a < axes.size()) {
      if (++idx[a] < axes[a].size()) break;
      idx[a] = 0;
      ++a;
    }
    if (a == axes.size()) break;
  }
}

}  // namespace

std::string ClosureProbeReport::verdict() const {
  if (!violation_found) return "no violation found at this resolution";
  return std::to_string(witnesses.size()) + " witness point(s) where int(closure(D)) appears to exceed D";
}

ClosureProbeReport interior_closure_probe(const BoundedDomain& domain, double resolution) {
  const auto& box = domain.bounding_box();
  if (!(resolution > 0.0) || resolution >= box.diameter()) {
    throw InvalidArgument("resolution must be positive and smaller than the bounding-box diameter");
  }
  const std::size_t n = domain.dimension();
  std::vector<std::vector<double>> axes;
  double total = 1.0;
  for (std::size_t j = 0; j < n; ++j) {
    axes.push_back(axis_nodes(box.re[j], resolution));
    axes.push_back(axis_nodes(box.im[j], resolution));
    total *= static_cast<double>(axes[axes.size() - 2].size() * axes.back().size());
  }
  if (total > 5e6) throw InvalidArgument("resolution too fine for this dimension (grid exceeds 5e6 points)");

  // Neighbour offsets: +-h along each real axis and a few fixed oblique directions.
  std::vector<std::vector<double>> offsets;
  const std::size_t d = 2 * n;
  for (std::size_t i = 0; i < d; ++i) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> v(d, 0.0);
      v[i] = s * resolution;
      offsets.push_back(v);
    }
  }
  Stream rng(0xc105e, StreamTag::probe_directions);
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> v(d);
    double nv = 0.0;
    for (auto& x : v) {
      x = rng.normal();
      nv += x * x;
    }
    nv = std::sqrt(nv);
    for (auto& x : v) x *= resolution / nv;
    offsets.push_back(v);
  }

  ClosureProbeReport report;
  report.resolution = resolution;
  Point y(n);
  for_each_tensor_point(axes, n, [&](const Point& z) {
    ++report.points_checked;
    if (domain.contains(z)) return;
    for (const auto& off : offsets) {
      for (std::size_t j = 0; j < n; ++j) y[j] = z[j] + cplx(off[2 * j], off[2 * j + 1]);
      if (!domain.contains(y)) return;
    }
    report.violation_found = true;
    if (report.witnesses.size() < 20) report.witnesses.push_back(z);
  });
  return report;
}

std::vector<Point> grid_points(const BoundedDomain& domain, int n_per_dim) {
  if (n_per_dim < 1) throw InvalidArgument("grid needs at least one node per dimension");
  const auto& box = domain.bounding_box();
  const std::size_t n = domain.dimension();
  std::vector<std::vector<double>> axes;
  for (std::size_t j = 0; j < n; ++j) {
    for (const Interval& iv : {box.re[j], box.im[j]}) {
      std::vector<double> nodes;
      const double w = (iv.hi - iv.lo) / n_per_dim;
      for (int i = 0; i < n_per_dim; ++i) nodes.push_back(iv.lo + (i + 0.5) * w);
      // Snap the center node to exactly zero for symmetric boxes.
      for (auto& x : nodes) {
        if (std::abs(x) < 1e-14 * (iv.hi - iv.lo)) x = 0.0;
      }
      axes.push_back(nodes);
    }
  }
  std::vector<Point> out;
  for_each_tensor_point(axes, n, [&](const Point& z) {
    if (domain.contains(z)) out.push_back(z);
  });
  return out;
}

}  // namespace apiso
