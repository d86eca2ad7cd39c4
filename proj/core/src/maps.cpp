#include "apiso/maps.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace apiso {

namespace {

cplx ipow(cplx z, long long e) {
  if (e < 0) return 1.0 / ipow(z, -e);
  cplx result = 1.0;
  cplx base = z;
  while (e > 0) {
    if (e & 1) result *= base;
    base *= base;
    e >>= 1;
  }
  return result;
}

// Fraction-free Gaussian elimination; exact for integer matrices of modest size.
long long bareiss_det(Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> a) {
  const Eigen::Index n = a.rows();
  if (n == 0) return 1;
  long long sign = 1;
  long long prev = 1;
  for (Eigen::Index k = 0; k < n - 1; ++k) {
    if (a(k, k) == 0) {
      Eigen::Index swap = -1;
      for (Eigen::Index i = k + 1; i < n; ++i) {
        if (a(i, k) != 0) {
          swap = i;
          break;
        }
      }
      if (swap < 0) return 0;
      a.row(k).swap(a.row(swap));
      sign = -sign;
    }
    for (Eigen::Index i = k + 1; i < n; ++i) {
      for (Eigen::Index j = k + 1; j < n; ++j) {
        a(i, j) = (a(i, j) * a(k, k) - a(i, k) * a(k, j)) / prev;
      }
    }
    prev = a(k, k);
  }
  return sign * a(n - 1, n - 1);
}

void require_dimension(std::size_t expected, std::size_t got) {
  if (expected != got) {
    throw InvalidArgument("point has dimension " + std::to_string(got) + ", map expects " + std::to_string(expected));
  }
}

double integral_or_nan(double x) {
  const double r = std::round(x);
  return std::abs(x - r) < 1e-9 ? r : std::nan("");
}

}  // namespace

// ---------------------------------------------------------------------------
// MonomialMap

MonomialMap::MonomialMap(Eigen::MatrixXi exponents, std::vector<cplx> coefficients)
    : exponents_(std::move(exponents)), coefficients_(std::move(coefficients)) {
  if (exponents_.rows() != exponents_.cols() || exponents_.rows() < 1) {
    throw InvalidArgument("monomial map needs a square nonempty exponent matrix");
  }
  if (coefficients_.empty()) coefficients_.assign(static_cast<std::size_t>(exponents_.rows()), 1.0);
  if (coefficients_.size() != static_cast<std::size_t>(exponents_.rows())) {
    throw InvalidArgument("monomial map needs one coefficient per output coordinate");
  }
  for (const cplx& c : coefficients_) {
    if (std::abs(std::abs(c) - 1.0) > 1e-12) throw InvalidArgument("monomial map coefficients must be unimodular");
  }
}

MonomialMap MonomialMap::identity(std::size_t n) {
  return MonomialMap(Eigen::MatrixXi::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n)),
                     std::vector<cplx>(n, 1.0));
}

Point MonomialMap::operator()(PointView z) const {
  const std::size_t n = dimension();
  require_dimension(n, z.size());
  Point out(n);
  MultiIndex row(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[j] = exponents_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    out[i] = coefficients_[i] * eval_monomial(row, z);
  }
  return out;
}

long long MonomialMap::exponent_determinant() const { return bareiss_det(exponents_.cast<long long>()); }

LaurentPolynomial MonomialMap::jacobian() const {
  const long long det = exponent_determinant();
  if (det == 0) throw NonInvertibleMap("exponent matrix is singular (det E = 0)");
  const std::size_t n = dimension();
  MultiIndex beta(n);
  for (std::size_t j = 0; j < n; ++j) beta[j] = exponents_.col(static_cast<Eigen::Index>(j)).sum() - 1;
  cplx c = static_cast<double>(det);
  for (const cplx& ci : coefficients_) c *= ci;
  return LaurentPolynomial::monomial(beta, c);
}

MonomialMap MonomialMap::inverse() const {
  const long long det = exponent_determinant();
  if (std::llabs(det) != 1) {
    throw NonInvertibleMap("exponent matrix has det " + std::to_string(det) +
                           "; only |det E| = 1 has an integral monomial inverse");
  }
  const Eigen::MatrixXd inv_d = exponents_.cast<double>().inverse();
  const Eigen::MatrixXi inv = inv_d.array().round().cast<int>().matrix();
  const Eigen::Index n = exponents_.rows();
  if ((exponents_ * inv) != Eigen::MatrixXi::Identity(n, n)) {
    throw NonInvertibleMap("integer inverse of the exponent matrix could not be recovered");
  }
  std::vector<cplx> coeffs(static_cast<std::size_t>(n), 1.0);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      coeffs[static_cast<std::size_t>(j)] *= ipow(coefficients_[static_cast<std::size_t>(i)], -inv(j, i));
    }
  }
  return MonomialMap(inv, coeffs);
}

MonomialMap MonomialMap::after(const MonomialMap& inner) const {
  require_dimension(dimension(), inner.dimension());
  const Eigen::MatrixXi e = exponents_ * inner.exponents_;
  std::vector<cplx> coeffs = coefficients_;
  const Eigen::Index n = exponents_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      coeffs[static_cast<std::size_t>(i)] *= ipow(inner.coefficients_[static_cast<std::size_t>(j)], exponents_(i, j));
    }
  }
  return MonomialMap(e, coeffs);
}

bool MonomialMap::operator==(const MonomialMap& other) const {
  return exponents_ == other.exponents_ && coefficients_ == other.coefficients_;
}

// ---------------------------------------------------------------------------
// Other steps

Point MobiusMap::operator()(PointView z) const {
  require_dimension(a.size(), z.size());
  Point out(z.begin(), z.end());
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] == cplx(0.0, 0.0)) continue;
    out[j] = (a[j] - z[j]) / (1.0 - std::conj(a[j]) * z[j]);
  }
  return out;
}

cplx MobiusMap::jacobian(PointView z) const {
  require_dimension(a.size(), z.size());
  cplx j = 1.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == cplx(0.0, 0.0)) continue;
    const cplx d = 1.0 - std::conj(a[i]) * z[i];
    j *= -(1.0 - std::norm(a[i])) / (d * d);
  }
  return j;
}

Point LinearMap::operator()(PointView z) const {
  require_dimension(dimension(), z.size());
  Eigen::VectorXcd v(static_cast<Eigen::Index>(z.size()));
  for (std::size_t j = 0; j < z.size(); ++j) v(static_cast<Eigen::Index>(j)) = z[j];
  const Eigen::VectorXcd w = matrix * v;
  return Point(w.data(), w.data() + w.size());
}

Point Permutation::operator()(PointView z) const {
  require_dimension(perm.size(), z.size());
  Point out(z.size());
  for (std::size_t i = 0; i < perm.size(); ++i) out[i] = z[perm[i]];
  return out;
}

MonomialMap Permutation::as_monomial() const {
  const auto n = static_cast<Eigen::Index>(perm.size());
  Eigen::MatrixXi e = Eigen::MatrixXi::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) e(i, static_cast<Eigen::Index>(perm[static_cast<std::size_t>(i)])) = 1;
  return MonomialMap(e, std::vector<cplx>(perm.size(), 1.0));
}

// ---------------------------------------------------------------------------
// HoloMapExpr

HoloMapExpr::HoloMapExpr(std::vector<Step> steps) : steps_(std::move(steps)) {
  if (steps_.empty()) throw InvalidArgument("map expression needs at least one step");
  const std::size_t n = dimension();
  for (const auto& s : steps_) {
    const std::size_t d = std::visit([](const auto& m) { return m.dimension(); }, s);
    if (d != n) throw InvalidArgument("map expression steps have inconsistent dimensions");
  }
  for (const auto& s : steps_) {
    if (const auto* p = std::get_if<Permutation>(&s)) {
      std::vector<std::size_t> sorted = p->perm;
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (sorted[i] != i) throw InvalidArgument("permutation is not a bijection of coordinates");
      }
    }
    if (const auto* m = std::get_if<MobiusMap>(&s)) {
      for (const cplx& a : m->a) {
        if (!(std::abs(a) < 1.0)) throw InvalidArgument("Möbius parameter must satisfy |a| < 1");
      }
    }
  }
}

HoloMapExpr::HoloMapExpr(MonomialMap m) : steps_{std::move(m)} {}

std::size_t HoloMapExpr::dimension() const {
  return std::visit([](const auto& m) { return m.dimension(); }, steps_.front());
}

Point HoloMapExpr::operator()(PointView z) const {
  Point cur(z.begin(), z.end());
  for (const auto& s : steps_) cur = std::visit([&](const auto& m) { return m(cur); }, s);
  return cur;
}

cplx HoloMapExpr::jacobian_det(PointView z) const {
  Point cur(z.begin(), z.end());
  cplx j = 1.0;
  for (const auto& s : steps_) {
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, MonomialMap>) {
            j *= m.jacobian()(cur);
          } else if constexpr (std::is_same_v<T, MobiusMap>) {
            j *= m.jacobian(cur);
          } else if constexpr (std::is_same_v<T, LinearMap>) {
            j *= m.jacobian();
          } else {
            j *= static_cast<double>(m.as_monomial().exponent_determinant());
          }
          cur = m(cur);
        },
        s);
  }
  return j;
}

HoloMapExpr HoloMapExpr::inverse() const {
  std::vector<Step> inv;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) {
    inv.push_back(std::visit(
        [](const auto& m) -> Step {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, MonomialMap>) {
            return m.inverse();
          } else if constexpr (std::is_same_v<T, MobiusMap>) {
            return m;
          } else if constexpr (std::is_same_v<T, LinearMap>) {
            Eigen::FullPivLU<Eigen::MatrixXcd> lu(m.matrix);
            if (!lu.isInvertible()) throw NonInvertibleMap("linear step is singular");
            return LinearMap{lu.inverse()};
          } else {
            Permutation p;
            p.perm.resize(m.perm.size());
            for (std::size_t i = 0; i < m.perm.size(); ++i) p.perm[m.perm[i]] = i;
            return p;
          }
        },
        *it));
  }
  return HoloMapExpr(std::move(inv));
}

HoloMapExpr HoloMapExpr::after(const HoloMapExpr& inner) const {
  if (inner.dimension() != dimension()) throw InvalidArgument("cannot compose maps of different dimensions");
  std::vector<Step> steps = inner.steps_;
  steps.insert(steps.end(), steps_.begin(), steps_.end());
  return HoloMapExpr(std::move(steps));
}

std::optional<MonomialMap> HoloMapExpr::as_monomial() const {
  std::optional<MonomialMap> acc;
  for (const auto& s : steps_) {
    MonomialMap step;
    if (const auto* m = std::get_if<MonomialMap>(&s)) {
      step = *m;
    } else if (const auto* p = std::get_if<Permutation>(&s)) {
      step = p->as_monomial();
    } else {
      return std::nullopt;
    }
    acc = acc ? step.after(*acc) : step;
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Free functions

cplx jacobian_det(const MonomialMap& m, PointView z) { return m.jacobian()(z); }

cplx jacobian_det(const HoloMapExpr& m, PointView z) { return m.jacobian_det(z); }

cplx jacobian_det_fd(const std::function<Point(PointView)>& f, PointView z, double h) {
  const std::size_t n = z.size();
  Eigen::MatrixXcd jac(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Point y(z.begin(), z.end());
  for (std::size_t j = 0; j < n; ++j) {
    auto at = [&](double t) {
      y[j] = z[j] + t;
      Point v = f(y);
      y[j] = z[j];
      return v;
    };
    const Point p2 = at(2 * h);
    const Point p1 = at(h);
    const Point m1 = at(-h);
    const Point m2 = at(-2 * h);
    for (std::size_t i = 0; i < n; ++i) {
      jac(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          (-p2[i] + 8.0 * p1[i] - 8.0 * m1[i] + m2[i]) / (12.0 * h);
    }
  }
  return jac.determinant();
}

LaurentPolynomial weight_branch(const MonomialMap& m, double p) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  const LaurentPolynomial jac = m.jacobian();
  const auto& [beta, c] = jac.single_term();
  MultiIndex out(beta.size());
  for (std::size_t j = 0; j < beta.size(); ++j) {
    const double q = integral_or_nan(2.0 * beta[j] / p);
    if (std::isnan(q)) {
      throw NoBranch("(2/p)*beta is not integral (beta_" + std::to_string(j + 1) + " = " +
                     std::to_string(beta[j]) + ", p = " + std::to_string(p) +
                     "): no Laurent-monomial branch of J^{2/p} exists");
    }
    out[j] = static_cast<int>(q);
  }
  return LaurentPolynomial::monomial(out);
}

LaurentPolynomial weight_branch(const HoloMapExpr& m, double p) {
  auto mono = m.as_monomial();
  if (!mono) throw NoBranch("Jacobian of a non-monomial chain is not a Laurent monomial");
  return weight_branch(*mono, p);
}

HoloFunction weight_function(const HoloMapExpr& m, double p) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  if (auto mono = m.as_monomial()) return HoloFunction(weight_branch(*mono, p));

  // Per-step branches evaluated along the chain.
  std::vector<std::function<cplx(PointView)>> factors;
  std::string label;
  for (const auto& s : m.steps()) {
    std::visit(
        [&](const auto& step) {
          using T = std::decay_t<decltype(step)>;
          if constexpr (std::is_same_v<T, MonomialMap>) {
            auto g = weight_branch(step, p);
            factors.push_back([g](PointView z) { return g(z); });
            label += "[monomial branch]";
          } else if constexpr (std::is_same_v<T, MobiusMap>) {
            factors.push_back([a = step.a, p](PointView z) {
              cplx v = 1.0;
              for (std::size_t j = 0; j < a.size(); ++j) {
                if (a[j] == cplx(0.0, 0.0)) continue;
                v *= std::pow(1.0 - std::norm(a[j]), 2.0 / p) * std::pow(1.0 - std::conj(a[j]) * z[j], -4.0 / p);
              }
              return v;
            });
            label += "[mobius branch]";
          } else if constexpr (std::is_same_v<T, LinearMap>) {
            const double c = std::pow(std::abs(step.jacobian()), 2.0 / p);
            factors.push_back([c](PointView) { return cplx(c, 0.0); });
            label += "[|det U|^{2/p}]";
          } else {
            factors.push_back([](PointView) { return cplx(1.0, 0.0); });
          }
        },
        s);
  }
  const HoloMapExpr chain = m;
  return HoloFunction(
      m.dimension(),
      [chain, factors](PointView z) {
        Point cur(z.begin(), z.end());
        cplx v = 1.0;
        for (std::size_t i = 0; i < factors.size(); ++i) {
          v *= factors[i](cur);
          cur = std::visit([&](const auto& step) { return step(cur); }, chain.steps()[i]);
        }
        return v;
      },
      label);
}

LaurentPolynomial compose(const LaurentPolynomial& outer, const MonomialMap& inner) {
  const std::size_t n = inner.dimension();
  if (outer.dimension() != n) throw InvalidArgument("pullback dimension mismatch");
  LaurentPolynomial out(n);
  const auto& e = inner.exponents();
  for (const auto& [alpha, c] : outer.terms()) {
    MultiIndex gamma(n, 0);
    cplx coef = c;
    for (std::size_t i = 0; i < n; ++i) {
      if (alpha[i] == 0) continue;
      coef *= ipow(inner.coefficients()[i], alpha[i]);
      for (std::size_t j = 0; j < n; ++j) {
        gamma[j] += alpha[i] * e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      }
    }
    out.add_term(gamma, coef);
  }
  return out;
}

MonomialMap fk_map(int k) {
  Eigen::MatrixXi e(2, 2);
  e << 1, 0, k, 1;
  return MonomialMap(e, {1.0, 1.0});
}

MonomialMap gk_map(int k) {
  Eigen::MatrixXi e(2, 2);
  e << 1, 0, -k, 1;
  return MonomialMap(e, {1.0, 1.0});
}

MonomialMap counterexample_F(int k) {
  Eigen::MatrixXi e = Eigen::MatrixXi::Identity(4, 4);
  e(1, 0) = k;
  e(3, 2) = -k;
  return MonomialMap(e, {1.0, 1.0, 1.0, 1.0});
}

MonomialMap counterexample_G(int k) {
  Eigen::MatrixXi e = Eigen::MatrixXi::Identity(4, 4);
  e(1, 0) = -k;
  e(3, 2) = k;
  return MonomialMap(e, {1.0, 1.0, 1.0, 1.0});
}

}  // namespace apiso
