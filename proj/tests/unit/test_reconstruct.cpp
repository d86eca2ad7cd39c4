#include <doctest.h>

#include <cmath>
#include <random>

#include "apiso/reconstruct.hpp"
#include "oracles.hpp"

using namespace apiso;

namespace {

const Point z0{0.3, 0.2, 0.5, 0.05};

double dist(const Point& a, const Point& b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += std::norm(a[j] - b[j]);
  return std::sqrt(s);
}

HoloMapExpr mobius_expr(cplx a) { return HoloMapExpr(std::vector<HoloMapExpr::Step>{MobiusMap{{a}}}); }

}  // namespace

TEST_CASE("ratio map examples") {
  const auto T = counterexample_isometry(3, 2);
  const auto maps = build_ratio_maps(IsometryOracle::from(T), coordinate_family(T));
  CHECK(maps.N == 4);
  REQUIRE(maps.symbolic_zero_set.has_value());
  CHECK(*maps.symbolic_zero_set == std::vector<std::size_t>{0});
  const auto I = maps.I(z0);
  REQUIRE(I.has_value());
  // phi_j / phi_0 = z_j (z3 / z1)^2 up to the unimodular constant
  const double scale = std::norm(0.5 / 0.3);
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs((*I)[j]) == doctest::Approx(std::abs(z0[j]) * scale));
  CHECK_FALSE(maps.I(Point{0.0, 0.2, 0.5, 0.05}).has_value());
  const auto J = maps.J(oracle::counterexample_F(3, z0));
  REQUIRE(J.has_value());
  for (std::size_t j = 0; j < 4; ++j) CHECK(std::abs((*J)[j] - (*I)[j]) < 1e-12);
}

TEST_CASE("solve_point recovers F on the counterexample") {
  const auto T = counterexample_isometry(3, 2);
  const auto maps = build_ratio_maps(IsometryOracle::from(T), default_family(T, 2));
  const auto s = solve_point(maps, T.target(), z0, {});
  REQUIRE(s.status == PointStatus::mapped);
  const Point expect{0.3, 0.0054, 0.5, 0.4};
  CHECK(dist(s.w, expect) < 1e-8);
  CHECK(s.residual <= 1e-10);

  const auto a1 = solve_point(maps, T.target(), Point{0.0, 0.2, 0.5, 0.05}, {});
  CHECK(a1.status == PointStatus::excluded_zero_weight);
}

TEST_CASE("solve_point recovers Möbius maps of the disc") {
  const auto D = make_catalog_domain(DomainSpec::disc());
  const cplx a(0.3, -0.1);
  const auto T = CompositionIsometry::from_map(D, D, mobius_expr(a), 1.0);
  const auto maps = build_ratio_maps(IsometryOracle::from(T), default_family(T, 3));
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> R(0.0, 0.9), Th(0.0, 2.0 * oracle::pi);
  for (std::uint64_t i = 0; i < 50; ++i) {
    const Point z{std::polar(R(rng), Th(rng))};
    const auto s = solve_point(maps, D, z, {}, i);
    REQUIRE(s.status == PointStatus::mapped);
    CHECK(std::abs(s.w[0] - oracle::mobius(a, z[0])) < 1e-6);
  }
}

TEST_CASE("reconstruct_map on a grid: exclusions and injectivity") {
  const auto T = counterexample_isometry(3, 2);
  const auto grid = grid_points(T.source().without_exclusions(), 3);
  REQUIRE(grid.size() > 20);
  std::vector<Point> sub;
  for (std::size_t i = 0; i < grid.size() && sub.size() < 40; i += 3) sub.push_back(grid[i]);
  const auto res = reconstruct_map(IsometryOracle::from(T), default_family(T, 2), sub);
  CHECK(res.unresolved == 0);
  CHECK(res.excluded_no_preimage == 0);
  CHECK(res.injectivity_violations.empty());
  REQUIRE(res.exclusion_matches_symbolic.has_value());
  CHECK(*res.exclusion_matches_symbolic);
  CHECK(res.mapped + res.excluded_zero_weight == sub.size());
  for (const auto& p : res.points) {
    if (p.status == PointStatus::mapped) {
      CHECK(dist(p.w, oracle::counterexample_F(3, p.z)) < 1e-6);
    } else {
      CHECK(p.z[0] == 0.0);
    }
  }
}

TEST_CASE("modulus identity holds at reconstructed pairs") {
  const auto T = counterexample_isometry(3, 2);
  const auto oracleT = IsometryOracle::from(T);
  const auto maps = build_ratio_maps(oracleT, default_family(T, 2));
  std::vector<std::pair<Point, Point>> pairs;
  for (const Point& z : {z0, Point{0.1, 0.05, -0.4, cplx(0.0, 0.02)}, Point{cplx(0.2, 0.2), 0.0, 0.7, 0.3}}) {
    const auto s = solve_point(maps, T.target(), z, {});
    REQUIRE(s.status == PointStatus::mapped);
    pairs.emplace_back(z, s.w);
  }
  const auto F = counterexample_F(3);
  const auto tests = admissible_monomial_battery(T, 20, 1, 2);
  const auto r = verify_modulus_identity(oracleT, pairs, tests, [&](PointView z) { return jacobian_det(F, z); });
  CHECK(r.max_relative_error < 1e-6);
  CHECK(r.evaluations > 0);

  // a wrong Jacobian is detected
  const auto bad = verify_modulus_identity(oracleT, pairs, tests, [&](PointView z) { return 2.0 * jacobian_det(F, z); });
  CHECK(bad.max_relative_error > 0.1);
}

TEST_CASE("evaluation functionals are proportional at (z, F(z)) only") {
  const auto T = counterexample_isometry(3, 2);
  const auto oracleT = IsometryOracle::from(T);
  const auto tests = admissible_monomial_battery(T, 20, 2, 2);
  const Point w = oracle::counterexample_F(3, z0);
  const auto good = verify_proportionality(oracleT, z0, w, tests);
  CHECK(good.spread < 1e-10);
  CHECK(good.used >= 10);
  Point w2 = w;
  w2[1] += 0.01;
  w2[3] -= 0.02;
  CHECK(verify_proportionality(oracleT, z0, w2, tests).spread > 1e-2);
}

TEST_CASE("property: the solution does not depend on the family size") {
  const auto T = counterexample_isometry(2, 3);
  const auto small = build_ratio_maps(IsometryOracle::from(T), default_family(T, 1));
  const auto large = build_ratio_maps(IsometryOracle::from(T), default_family(T, 3));
  for (const Point& z : {Point{0.3, 0.2, 0.5, 0.05}, Point{-0.2, 0.4, cplx(0.3, 0.3), 0.01}}) {
    const auto a = solve_point(small, T.target(), z, {});
    const auto b = solve_point(large, T.target(), z, {});
    REQUIRE(a.status == PointStatus::mapped);
    REQUIRE(b.status == PointStatus::mapped);
    CHECK(dist(a.w, b.w) < 1e-8);
  }
}

TEST_CASE("property: reconstructions of T and T^-1 compose to the identity") {
  const auto D = make_catalog_domain(DomainSpec::disc());
  const auto T = CompositionIsometry::from_map(D, D, mobius_expr(cplx(0.2, 0.4)), 1.0);
  const auto Ti = T.inverse();
  const auto fwd = build_ratio_maps(IsometryOracle::from(T), default_family(T, 3));
  const auto bwd = build_ratio_maps(IsometryOracle::from(Ti), default_family(Ti, 3));
  for (double t = 0.0; t < 6.0; t += 0.5) {
    const Point z{std::polar(0.7, t)};
    const auto s = solve_point(fwd, D, z, {});
    REQUIRE(s.status == PointStatus::mapped);
    const auto back = solve_point(bwd, D, s.w, {});
    REQUIRE(back.status == PointStatus::mapped);
    CHECK(std::abs(back.w[0] - z[0]) < 1e-6);
  }
}

TEST_CASE("property: points approaching z1 = 0 map toward the target boundary") {
  const auto T = counterexample_isometry(3, 2);
  const auto maps = build_ratio_maps(IsometryOracle::from(T), default_family(T, 2));
  std::optional<Point> warm;
  for (int j = 0; j < 8; ++j) {
    const double t = 0.1 * std::ldexp(1.0, -j);
    const Point z{t, 0.2, 0.5, 0.05};
    const auto s = solve_point(maps, T.target(), z, {}, 0, warm);
    REQUIRE(s.status == PointStatus::mapped);
    warm = s.w;
    const auto d = boundary_distance(T.target(), s.w, 1e-12);
    CHECK(d.distance <= t * (1.0 + 1e-6));
  }
}

TEST_CASE("degenerate families are rejected") {
  const auto D = make_catalog_domain(DomainSpec::disc());
  const auto T = identity_isometry(D, 2.0);
  const FunctionFamily fam{{HoloFunction(LaurentPolynomial(1)), HoloFunction(LaurentPolynomial::coordinate(1, 0))}};
  CHECK_THROWS_AS(build_ratio_maps(IsometryOracle::from(T), fam), DegenerateFamily);
}
