#include "apiso/laurent.hpp"

#include <cstdlib>
#include <sstream>

namespace apiso {

namespace {

cplx ipow(cplx z, int e) {
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

}  // namespace

cplx eval_monomial(const MultiIndex& alpha, PointView z) {
  if (z.size() != alpha.size()) {
    throw InvalidArgument("point has dimension " + std::to_string(z.size()) + ", monomial expects " +
                          std::to_string(alpha.size()));
  }
  cplx v = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] == 0) continue;
    if (alpha[j] < 0 && z[j] == cplx(0.0, 0.0)) {
      throw PoleError("pole at z" + std::to_string(j + 1) + " = 0 (exponent " + std::to_string(alpha[j]) + ")");
    }
    v *= ipow(z[j], alpha[j]);
  }
  return v;
}

int total_degree(const MultiIndex& alpha) {
  int d = 0;
  for (int a : alpha) d += a;
  return d;
}

LaurentPolynomial::LaurentPolynomial(std::size_t dimension) : dimension_(dimension) {}

LaurentPolynomial LaurentPolynomial::constant(std::size_t dimension, cplx c) {
  LaurentPolynomial f(dimension);
  f.add_term(MultiIndex(dimension, 0), c);
  return f;
}

LaurentPolynomial LaurentPolynomial::monomial(MultiIndex alpha, cplx c) {
  LaurentPolynomial f(alpha.size());
  f.add_term(alpha, c);
  return f;
}

LaurentPolynomial LaurentPolynomial::coordinate(std::size_t dimension, std::size_t j) {
  if (j >= dimension) throw InvalidArgument("coordinate index out of range");
  MultiIndex alpha(dimension, 0);
  alpha[j] = 1;
  return monomial(alpha);
}

const LaurentPolynomial::Terms::value_type& LaurentPolynomial::single_term() const {
  if (!is_monomial()) throw InvalidArgument("expected a single-term Laurent polynomial, got " + to_string());
  return *terms_.begin();
}

void LaurentPolynomial::check_dimension(std::size_t n) const {
  if (n != dimension_) {
    throw InvalidArgument("dimension mismatch: " + std::to_string(n) + " vs " + std::to_string(dimension_));
  }
}

void LaurentPolynomial::add_term(const MultiIndex& alpha, cplx c) {
  check_dimension(alpha.size());
  if (c == cplx(0.0, 0.0)) return;
  auto [it, inserted] = terms_.try_emplace(alpha, c);
  if (!inserted) {
    it->second += c;
    if (it->second == cplx(0.0, 0.0)) terms_.erase(it);
  }
}

cplx LaurentPolynomial::coefficient(const MultiIndex& alpha) const {
  auto it = terms_.find(alpha);
  return it == terms_.end() ? cplx(0.0, 0.0) : it->second;
}

cplx LaurentPolynomial::operator()(PointView z) const {
  check_dimension(z.size());
  cplx sum = 0.0;
  for (const auto& [alpha, c] : terms_) sum += c * eval_monomial(alpha, z);
  return sum;
}

std::vector<std::size_t> LaurentPolynomial::pole_coordinates() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < dimension_; ++j) {
    for (const auto& [alpha, c] : terms_) {
      if (alpha[j] < 0) {
        out.push_back(j);
        break;
      }
    }
  }
  return out;
}

std::vector<std::size_t> LaurentPolynomial::zero_hyperplanes() const {
  const auto& [alpha, c] = single_term();
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    if (alpha[j] > 0) out.push_back(j);
  }
  return out;
}

LaurentPolynomial& LaurentPolynomial::operator+=(const LaurentPolynomial& other) {
  if (terms_.empty() && dimension_ == 0) dimension_ = other.dimension_;
  check_dimension(other.dimension_);
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, c);
  return *this;
}

LaurentPolynomial& LaurentPolynomial::operator-=(const LaurentPolynomial& other) {
  if (terms_.empty() && dimension_ == 0) dimension_ = other.dimension_;
  check_dimension(other.dimension_);
  for (const auto& [alpha, c] : other.terms_) add_term(alpha, -c);
  return *this;
}

LaurentPolynomial& LaurentPolynomial::operator*=(cplx c) {
  if (c == cplx(0.0, 0.0)) {
    terms_.clear();
    return *this;
  }
  for (auto& [alpha, coef] : terms_) coef *= c;
  return *this;
}

LaurentPolynomial operator*(const LaurentPolynomial& a, const LaurentPolynomial& b) {
  a.check_dimension(b.dimension_);
  LaurentPolynomial out(a.dimension_);
  for (const auto& [alpha, ca] : a.terms_) {
    for (const auto& [beta, cb] : b.terms_) {
      MultiIndex gamma(alpha.size());
      for (std::size_t j = 0; j < alpha.size(); ++j) gamma[j] = alpha[j] + beta[j];
      out.add_term(gamma, ca * cb);
    }
  }
  return out;
}

std::string LaurentPolynomial::to_string() const {
  if (terms_.empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [alpha, c] : terms_) {
    if (!first) os << " + ";
    first = false;
    os << "(" << c.real() << (c.imag() < 0 ? "-" : "+") << std::abs(c.imag()) << "i)";
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (alpha[j] == 0) continue;
      os << "*z" << (j + 1);
      if (alpha[j] != 1) os << "^" << alpha[j];
    }
  }
  return os.str();
}

double max_coefficient_difference(const LaurentPolynomial& a, const LaurentPolynomial& b) {
  double worst = 0.0;
  for (const auto& [alpha, c] : a.terms()) worst = std::max(worst, std::abs(c - b.coefficient(alpha)));
  for (const auto& [alpha, c] : b.terms()) worst = std::max(worst, std::abs(c - a.coefficient(alpha)));
  return worst;
}

}  // namespace apiso
