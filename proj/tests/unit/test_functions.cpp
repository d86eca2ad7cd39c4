#include <doctest.h>

#include <cmath>
#include <random>

#include "apiso/holo.hpp"
#include "apiso/laurent.hpp"
#include "apiso/maps.hpp"
#include "oracles.hpp"

using namespace apiso;

namespace {

const Point z0{0.3, 0.2, 0.5, 0.05};

/// Unimodular exponent matrix from random elementary row operations.
MonomialMap random_unimodular(std::mt19937_64& rng, std::size_t n) {
  Eigen::MatrixXi E = Eigen::MatrixXi::Identity(static_cast<int>(n), static_cast<int>(n));
  std::uniform_int_distribution<int> idx(0, static_cast<int>(n) - 1), mult(-2, 2);
  for (int s = 0; s < 4; ++s) {
    const int i = idx(rng), j = idx(rng);
    if (i != j) E.row(i) += mult(rng) * E.row(j);
  }
  std::uniform_real_distribution<double> Th(0.0, 6.28);
  std::vector<cplx> c(n);
  for (auto& x : c) x = std::polar(1.0, Th(rng));
  return MonomialMap(E, c);
}

Point random_point(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> R(0.2, 0.9), Th(0.0, 6.28);
  Point z(n);
  for (auto& x : z) x = std::polar(R(rng), Th(rng));
  return z;
}

}  // namespace

TEST_CASE("Laurent evaluation examples") {
  CHECK(LaurentPolynomial::monomial({1, 0, -1, 0})(z0).real() == doctest::Approx(0.6));
  CHECK(LaurentPolynomial::constant(4, 1.0)(z0) == cplx(1.0));
  CHECK(LaurentPolynomial::monomial({2, 0, -2, 0})(z0).real() == doctest::Approx(0.36));
  CHECK(LaurentPolynomial::monomial({}, 1.0)(Point{}) == cplx(1.0));
  CHECK_THROWS_AS(LaurentPolynomial::monomial({0, -1})(Point{1.0, 0.0}), PoleError);
}

TEST_CASE("Laurent arithmetic") {
  const auto z1 = LaurentPolynomial::coordinate(2, 0);
  const auto z2 = LaurentPolynomial::coordinate(2, 1);
  auto f = (z1 + z2) * (z1 - z2);
  CHECK(f.coefficient({2, 0}) == cplx(1.0));
  CHECK(f.coefficient({0, 2}) == cplx(-1.0));
  CHECK(f.coefficient({1, 1}) == cplx(0.0));
  CHECK(f.terms().size() == 2);
  CHECK((f - f).is_zero());
  const auto m = LaurentPolynomial::monomial({2, -1, 0, 3});
  CHECK(m.zero_hyperplanes() == std::vector<std::size_t>{0, 3});
  CHECK(m.pole_coordinates() == std::vector<std::size_t>{1});
  CHECK(max_coefficient_difference(f, f * cplx(1.0 + 1e-3)) == doctest::Approx(1e-3));
  CHECK_THROWS_AS(z1 + LaurentPolynomial::coordinate(3, 0), InvalidArgument);
}

TEST_CASE("Jacobian determinant examples") {
  CHECK(jacobian_det(counterexample_F(3), z0).real() == doctest::Approx(0.216));
  CHECK(std::abs(jacobian_det(counterexample_F(3), z0).imag()) < 1e-15);
  CHECK(jacobian_det(MonomialMap::identity(3), Point{0.1, 0.2, 0.3}) == cplx(1.0));
  CHECK(jacobian_det(gk_map(3), Point{0.5, 0.2}).real() == doctest::Approx(8.0));
  CHECK(jacobian_det(fk_map(2), Point{0.5, 0.2}).real() == doctest::Approx(0.25));
}

TEST_CASE("weight branch examples") {
  const auto G = weight_branch(counterexample_G(3), 3.0);
  CHECK(G == LaurentPolynomial::monomial({-2, 0, 2, 0}));
  CHECK(weight_branch(MonomialMap::identity(2), 0.7) == LaurentPolynomial::constant(2, 1.0));
  CHECK(weight_branch(counterexample_F(3), 3.0) == LaurentPolynomial::monomial({2, 0, -2, 0}));
  CHECK_THROWS_AS(weight_branch(counterexample_F(3), 4.0), NoBranch);
  CHECK_THROWS_AS(weight_branch(HoloMapExpr(std::vector<HoloMapExpr::Step>{MobiusMap{{0.3}}}), 1.0), NoBranch);
}

TEST_CASE("compose examples") {
  const auto G = counterexample_G(3);
  CHECK(compose(LaurentPolynomial::monomial({2, 0, 0, 0}), G) == LaurentPolynomial::monomial({2, 0, 0, 0}));
  CHECK(compose(LaurentPolynomial::monomial({0, 1, 0, 0}), G) == LaurentPolynomial::monomial({-3, 1, 0, 0}));
  CHECK(compose(LaurentPolynomial::constant(4, 1.0), G) == LaurentPolynomial::constant(4, 1.0));
}

TEST_CASE("F and G are mutually inverse") {
  for (int k = 1; k <= 4; ++k) {
    const auto F = counterexample_F(k);
    const auto G = counterexample_G(k);
    CHECK(F.after(G) == MonomialMap::identity(4));
    CHECK(F.inverse() == G);
    const Point w = F(z0);
    const Point expect = oracle::counterexample_F(k, z0);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(w[j] - expect[j]) < 1e-14);
    const Point back = G(w);
    for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs(back[j] - z0[j]) < 1e-13);
  }
}

TEST_CASE("property: Jacobian determinants agree with finite differences") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 3;
    const auto m = random_unimodular(rng, n);
    const Point z = random_point(rng, n);
    const cplx exact = jacobian_det(m, z);
    const cplx fd = jacobian_det_fd([&](PointView x) { return m(x); }, z, 1e-3);
    CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));
  }
}

TEST_CASE("property: Möbius and linear chains agree with finite differences") {
  std::mt19937_64 rng(5);
  Eigen::MatrixXcd U(2, 2);
  U << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  const HoloMapExpr chain(
      std::vector<HoloMapExpr::Step>{MobiusMap{{cplx(0.3, 0.1), 0.0}}, LinearMap{U}, fk_map(2)});
  for (int trial = 0; trial < 50; ++trial) {
    Point z = random_point(rng, 2);
    for (auto& x : z) x *= 0.5;
    const cplx exact = chain.jacobian_det(z);
    const cplx fd = jacobian_det_fd([&](PointView x) { return chain(x); }, z, 1e-3);
    CHECK(std::abs(fd - exact) <= 1e-6 * std::abs(exact));
  }
}

TEST_CASE("Möbius maps are involutions of the disc") {
  const MobiusMap m{{cplx(0.3, -0.2)}};
  for (double t = 0.0; t < 6.0; t += 0.5) {
    const Point z{std::polar(0.7, t)};
    const Point w = m(z);
    CHECK(std::abs(w[0] - oracle::mobius(cplx(0.3, -0.2), z[0])) < 1e-15);
    CHECK(std::abs(w[0]) < 1.0);
    CHECK(std::abs(m(w)[0] - z[0]) < 1e-14);
  }
  const HoloMapExpr e(std::vector<HoloMapExpr::Step>{m});
  const Point z{0.4};
  CHECK(std::abs(e.inverse()(e(z))[0] - z[0]) < 1e-14);
}

TEST_CASE("property: weight branches satisfy |w|^p = |J|^2") {
  std::mt19937_64 rng(7);
  for (int k = 1; k <= 4; ++k) {
    for (int m = 1; m <= 4; ++m) {
      const double p = 2.0 * k / m;
      for (const auto& map : {counterexample_F(k), counterexample_G(k)}) {
        const auto w = weight_branch(map, p);
        for (int i = 0; i < 20; ++i) {
          const Point z = random_point(rng, 4);
          const double lhs = std::pow(std::abs(w(z)), p);
          const double rhs = std::norm(jacobian_det(map, z));
          CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
        }
      }
    }
  }
}

TEST_CASE("property: weight_function modulus for Möbius and linear steps") {
  Eigen::MatrixXcd U(2, 2);
  U << cplx(0.6, 0.0), cplx(0.0, 0.8), cplx(0.0, 0.8), cplx(0.6, 0.0);
  const HoloMapExpr mob(std::vector<HoloMapExpr::Step>{MobiusMap{{cplx(0.3, 0.2), cplx(-0.1, 0.4)}}});
  const HoloMapExpr lin(std::vector<HoloMapExpr::Step>{LinearMap{U * 1.5}});
  std::mt19937_64 rng(9);
  for (double p : {0.5, 1.0, 3.0}) {
    for (const auto* map : {&mob, &lin}) {
      const HoloFunction g = weight_function(*map, p);
      for (int i = 0; i < 20; ++i) {
        Point z = random_point(rng, 2);
        for (auto& x : z) x *= 0.6;
        const double lhs = std::pow(std::abs(g(z)), p);
        const double rhs = std::norm(map->jacobian_det(z));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
      }
    }
  }
}

TEST_CASE("property: compose is functorial") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> E(-3, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto m1 = random_unimodular(rng, 3);
    const auto m2 = random_unimodular(rng, 3);
    LaurentPolynomial phi(3);
    for (int t = 0; t < 3; ++t) phi.add_term({E(rng), E(rng), E(rng)}, cplx(E(rng), E(rng)));
    const auto lhs = compose(compose(phi, m1), m2);
    const auto rhs = compose(phi, m1.after(m2));
    CHECK(max_coefficient_difference(lhs, rhs) <= 1e-12 * (1.0 + max_coefficient_difference(lhs, LaurentPolynomial(3))));
    const Point z = random_point(rng, 3);
    CHECK(std::abs(lhs(z) - phi(m1(m2(z)))) <= 1e-10 * (1.0 + std::abs(lhs(z))));
  }
}

TEST_CASE("monomial map inverses") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const auto m = random_unimodular(rng, 3);
    const auto inv = m.inverse();
    const Point z = random_point(rng, 3);
    const Point back = inv(m(z));
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(back[j] - z[j]) < 1e-9);
  }
  Eigen::MatrixXi E(2, 2);
  E << 2, 0, 0, 1;
  CHECK_THROWS_AS(MonomialMap(E, {1.0, 1.0}).inverse(), NonInvertibleMap);
}

TEST_CASE("holomorphic function products keep exact forms") {
  const HoloFunction a(LaurentPolynomial::monomial({1, 0}));
  const HoloFunction b(LaurentPolynomial::monomial({0, 2}, cplx(0.0, 2.0)));
  const HoloFunction c = a * b;
  REQUIRE(c.laurent() != nullptr);
  CHECK(*c.laurent() == LaurentPolynomial::monomial({1, 2}, cplx(0.0, 2.0)));
  const HoloFunction e(2, [](PointView z) { return std::exp(z[0]); }, "exp(z1)");
  const HoloFunction d = a * e;
  CHECK(d.laurent() == nullptr);
  CHECK(std::abs(d(Point{0.5, 0.1}) - 0.5 * std::exp(0.5)) < 1e-15);
}
