#include "apiso/reconstruct.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

namespace apiso {

namespace {

using VecC = Eigen::VectorXcd;
using MatC = Eigen::MatrixXcd;

std::optional<std::vector<cplx>> ratio_vector(const FunctionFamily& fam, PointView z) {
  try {
    const cplx d = fam.members[0](z);
    if (d == 0.0) return std::nullopt;
    std::vector<cplx> out(fam.size());
    for (std::size_t j = 1; j < fam.members.size(); ++j) out[j - 1] = fam.members[j](z) / d;
    for (const auto& v : out) {
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return std::nullopt;
    }
    return out;
  } catch (const PoleError&) {
    return std::nullopt;
  }
}

double norm2(const std::vector<cplx>& v) {
  double s = 0.0;
  for (const auto& x : v) s += std::norm(x);
  return std::sqrt(s);
}

std::optional<Point> random_member(const BoundedDomain& d, Stream& rng) {
  const auto& box = d.bounding_box();
  Point z(d.dimension());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (std::size_t j = 0; j < z.size(); ++j) {
      z[j] = cplx(rng.uniform(box.re[j].lo, box.re[j].hi), rng.uniform(box.im[j].lo, box.im[j].hi));
    }
    if (d.contains(z)) return z;
  }
  return std::nullopt;
}

void monomials_of_degree(std::size_t n, int degree, MultiIndex& cur, std::size_t j, std::vector<MultiIndex>& out) {
  if (j + 1 == n) {
    cur[j] = degree;
    out.push_back(cur);
    return;
  }
  for (int a = degree; a >= 0; --a) {
    cur[j] = a;
    monomials_of_degree(n, degree - a, cur, j + 1, out);
  }
}

constexpr double kBoxSlack = 1e3;

struct StartOutcome {
  Point w;
  double residual = INFINITY;
  int iterations = 0;
  bool settled = false;
};

// Levenberg-Marquardt from one start on the residual components scaled by
// 1 / (1 + |I_j|). The Jacobian of the holomorphic J_N uses the four-point
// stencil (f(w+h) - f(w-h) - i f(w+ih) + i f(w-ih)) / (4h).
StartOutcome gauss_newton(const RatioMaps& maps, const BoundedDomain& target, const std::vector<cplx>& I_z,
                          double scale, Point w, const SolverConfig& cfg) {
  const std::size_t n = w.size();
  const std::size_t N = I_z.size();
  const auto ni = static_cast<Eigen::Index>(n);
  const auto Ni = static_cast<Eigen::Index>(N);
  StartOutcome out;
  Eigen::VectorXd wt(Ni);
  for (std::size_t j = 0; j < N; ++j) wt[static_cast<Eigen::Index>(j)] = 1.0 / (1.0 + std::abs(I_z[j]));
  BoundingBox box = target.bounding_box();
  for (auto* iv : {&box.re, &box.im}) {
    for (auto& [lo, hi] : *iv) {
      const double c = 0.5 * (lo + hi), h = 0.5 * (hi - lo);
      lo = c - kBoxSlack * h;
      hi = c + kBoxSlack * h;
    }
  }
  // Weighted residual; false outside the enlarged box or where J_N is undefined.
  auto eval = [&](const Point& x, VecC& r) -> bool {
    if (!box.contains(x)) return false;
    auto J = maps.J(x);
    if (!J) return false;
    r.resize(Ni);
    for (std::size_t j = 0; j < N; ++j) {
      const auto e = static_cast<Eigen::Index>(j);
      r[e] = ((*J)[j] - I_z[j]) * wt[e];
    }
    return true;
  };
  auto plain = [&](const VecC& r) { return r.cwiseQuotient(wt.cast<cplx>()).norm() / scale; };
  VecC r;
  if (!eval(w, r)) return out;
  double merit = r.squaredNorm();
  double mu = 1e-3;
  MatC D(Ni, ni);
  for (int it = 0; it < cfg.max_iterations; ++it) {
    out.iterations = it + 1;
    if (plain(r) < 1e-3 * cfg.tol) {
      out.settled = true;
      break;
    }
    bool ok = true;
    for (std::size_t k = 0; k < n && ok; ++k) {
      // shrink the stencil until it avoids the poles of J_N
      double h = 1e-3 * (std::abs(w[k]) + 1e-3);
      const cplx coef[4] = {1.0, -1.0, cplx(0, -1), cplx(0, 1)};
      VecC col;
      bool stencil_ok = false;
      for (int shrink = 0; shrink < 8 && !stencil_ok; ++shrink, h *= 0.1) {
        const cplx steps[4] = {cplx(h, 0), cplx(-h, 0), cplx(0, h), cplx(0, -h)};
        col = VecC::Zero(Ni);
        stencil_ok = true;
        for (int s = 0; s < 4; ++s) {
          Point x = w;
          x[k] += steps[s];
          auto J = maps.J(x);
          if (!J) {
            stencil_ok = false;
            break;
          }
          for (std::size_t j = 0; j < N; ++j) col[static_cast<Eigen::Index>(j)] += coef[s] * (*J)[j];
        }
        if (stencil_ok) D.col(static_cast<Eigen::Index>(k)) = col.cwiseProduct(wt.cast<cplx>()) / (4.0 * h);
      }
      ok = stencil_ok;
    }
    if (!ok) break;
    const MatC A = D.adjoint() * D;
    const VecC grad = D.adjoint() * r;
    bool accepted = false;
    while (mu < 1e12) {
      MatC M = A;
      for (Eigen::Index k = 0; k < ni; ++k) M(k, k) += mu * std::max(A(k, k).real(), 1e-12);
      const VecC delta = M.ldlt().solve(-grad);
      Point x = w;
      for (std::size_t k = 0; k < n; ++k) x[k] += delta[static_cast<Eigen::Index>(k)];
      VecC r_new;
      if (eval(x, r_new) && r_new.squaredNorm() < merit) {
        const double step = delta.norm();
        w = std::move(x);
        r = std::move(r_new);
        merit = r.squaredNorm();
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        if (step < 1e-15 * (1.0 + std::abs(w[0]))) out.settled = true;
        break;
      }
      mu *= 4.0;
    }
    if (!accepted || out.settled) {
      out.settled = true;
      break;
    }
  }
  if (!target.contains(w)) return StartOutcome{std::move(w), INFINITY, out.iterations, out.settled};
  out.residual = plain(r);
  out.w = std::move(w);
  return out;
}

// Follows the straight source path from (z_from, w_from) to z_to, warm-starting
// each step from the previous image and halving steps that fail.
std::optional<PointSolution> continue_along(const RatioMaps& maps, const BoundedDomain& source,
                                            const BoundedDomain& target, const Point& z_from, const Point& w_from,
                                            const Point& z_to, const SolverConfig& cfg) {
  SolverConfig c = cfg;
  c.starts = 0;
  double t = 0.0, dt = 0.125;
  Point w = w_from;
  int total_iterations = 0;
  while (t < 1.0) {
    const double t_next = std::min(1.0, t + dt);
    Point z(z_from.size());
    for (std::size_t k = 0; k < z.size(); ++k) z[k] = z_from[k] + t_next * (z_to[k] - z_from[k]);
    if (!source.contains(z)) return std::nullopt;
    PointSolution s = solve_point(maps, target, z, c, 0, w);
    total_iterations += s.iterations;
    if (s.status == PointStatus::mapped) {
      w = s.w;
      t = t_next;
      if (t >= 1.0) {
        s.iterations = total_iterations;
        return s;
      }
      dt = std::min(0.25, 2.0 * dt);
    } else {
      dt *= 0.5;
      if (dt < 1.0 / 1024.0) return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

IsometryOracle IsometryOracle::from(const CompositionIsometry& T) {
  return IsometryOracle{T.source(), T.target(), T.p(), [T](const HoloFunction& f) { return T.apply(f); }};
}

std::optional<std::vector<cplx>> RatioMaps::I(PointView z) const { return ratio_vector(source_family, z); }
std::optional<std::vector<cplx>> RatioMaps::J(PointView w) const { return ratio_vector(target_family, w); }

RatioMaps build_ratio_maps(const IsometryOracle& T, const FunctionFamily& family, std::uint64_t seed) {
  if (family.members.size() < 2) throw InvalidArgument("family needs phi_0 and at least one more member");
  RatioMaps maps;
  maps.N = family.size();
  maps.source_family = family;
  for (const auto& f : family.members) maps.target_family.members.push_back(T.apply(f));

  auto nonzero_somewhere = [&](const BoundedDomain& d, const HoloFunction& f) {
    Stream rng(seed, StreamTag::test_points, 0);
    for (int i = 0; i < 32; ++i) {
      auto z = random_member(d, rng);
      if (!z) break;
      try {
        if (f(*z) != 0.0) return true;
      } catch (const PoleError&) {
      }
    }
    return false;
  };
  if (!nonzero_somewhere(T.source, family.weight())) throw DegenerateFamily("phi_0 vanishes on every probe point");
  if (!nonzero_somewhere(T.target, maps.target_family.weight())) {
    throw DegenerateFamily("psi_0 = T(phi_0) vanishes on every probe point");
  }
  if (const LaurentPolynomial* lp = family.weight().laurent(); lp && lp->is_monomial()) {
    maps.symbolic_zero_set = lp->zero_hyperplanes();
  }
  return maps;
}

FunctionFamily default_family(const CompositionIsometry& T, int degree, std::size_t extra) {
  if (degree < 0) throw InvalidArgument("family degree must be non-negative");
  const std::size_t n = T.source().dimension();
  FunctionFamily fam;
  fam.members.push_back(T.inverse().apply(HoloFunction(LaurentPolynomial::constant(n, 1.0))));
  MultiIndex cur(n);
  std::vector<MultiIndex> idx;
  for (int d = 0; d <= degree; ++d) monomials_of_degree(n, d, cur, 0, idx);
  std::vector<MultiIndex> next;
  monomials_of_degree(n, degree + 1, cur, 0, next);
  for (std::size_t i = 0; i < std::min(extra, next.size()); ++i) idx.push_back(next[i]);
  for (auto& a : idx) fam.members.emplace_back(LaurentPolynomial::monomial(a));
  return fam;
}

std::string to_string(PointStatus s) {
  switch (s) {
    case PointStatus::mapped: return "mapped";
    case PointStatus::excluded_zero_weight: return "excluded_zero_weight";
    case PointStatus::excluded_no_preimage: return "excluded_no_preimage";
    case PointStatus::unresolved_budget: return "unresolved_budget";
  }
  return "?";
}

PointSolution solve_point(const RatioMaps& maps, const BoundedDomain& target, PointView z, const SolverConfig& cfg,
                          std::uint64_t index, std::optional<Point> warm_start) {
  PointSolution sol;
  sol.z.assign(z.begin(), z.end());
  try {
    sol.phi0_abs = std::abs(maps.source_family.weight()(z));
  } catch (const PoleError&) {
    sol.phi0_abs = 0.0;
  }
  const auto I_z = maps.I(z);
  if (!I_z || sol.phi0_abs <= cfg.exclusion_threshold) {
    sol.status = PointStatus::excluded_zero_weight;
    return sol;
  }
  const double scale = 1.0 + norm2(*I_z);
  Stream rng(cfg.seed, StreamTag::solver_starts, index);
  bool all_settled = true;
  double best = INFINITY;
  const int total = cfg.starts + (warm_start ? 1 : 0);
  for (int s = 0; s < total; ++s) {
    std::optional<Point> w0 = (warm_start && s == 0) ? warm_start : random_member(target, rng);
    if (!w0) break;
    StartOutcome o = gauss_newton(maps, target, *I_z, scale, *w0, cfg);
    sol.iterations += o.iterations;
    sol.starts_used = s + 1;
    all_settled = all_settled && o.settled;
    if (o.residual < best) {
      best = o.residual;
      sol.w = o.w;
      sol.residual = o.residual;
    }
    if (best < 1e-3 * cfg.tol) break;
  }
  if (best < cfg.tol) {
    sol.status = PointStatus::mapped;
  } else {
    sol.status = all_settled ? PointStatus::excluded_no_preimage : PointStatus::unresolved_budget;
    if (!std::isfinite(best)) sol.residual = INFINITY;
  }
  return sol;
}

ReconstructionResult reconstruct_map(const IsometryOracle& T, const FunctionFamily& family,
                                     const std::vector<Point>& grid, const SolverConfig& cfg) {
  const RatioMaps maps = build_ratio_maps(T, family, cfg.seed);
  const BoundedDomain closure = T.source.without_exclusions();
  for (const auto& z : grid) {
    if (z.size() != T.source.dimension() || !closure.contains(z)) {
      throw InvalidArgument("grid point outside the source domain");
    }
  }
  ReconstructionResult out;
  std::vector<double> weights;
  for (const auto& z : grid) {
    try {
      weights.push_back(std::abs(family.weight()(z)));
    } catch (const PoleError&) {
      weights.push_back(0.0);
    }
  }
  SolverConfig c = cfg;
  if (!weights.empty()) {
    std::vector<double> sorted = weights;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    c.exclusion_threshold = std::max(cfg.exclusion_threshold, cfg.exclusion_relative * sorted[sorted.size() / 2]);
  }
  out.exclusion_threshold = c.exclusion_threshold;
  out.points.resize(grid.size());
  parallel_for(grid.size(), [&](std::size_t i) { out.points[i] = solve_point(maps, T.target, grid[i], c, i); });

  // Second pass: continuation from the nearest points mapped in the first pass.
  const std::vector<PointSolution> first = out.points;
  parallel_for(grid.size(), [&](std::size_t i) {
    const PointStatus st = first[i].status;
    if (st != PointStatus::excluded_no_preimage && st != PointStatus::unresolved_budget) return;
    std::vector<std::pair<double, std::size_t>> near;
    for (std::size_t j = 0; j < first.size(); ++j) {
      if (first[j].status != PointStatus::mapped) continue;
      double d = 0.0;
      for (std::size_t k = 0; k < grid[i].size(); ++k) d += std::norm(grid[i][k] - grid[j][k]);
      near.emplace_back(d, j);
    }
    std::sort(near.begin(), near.end());
    for (std::size_t a = 0; a < std::min<std::size_t>(near.size(), cfg.continuation_neighbours); ++a) {
      const std::size_t j = near[a].second;
      auto s = continue_along(maps, T.source, T.target, grid[j], first[j].w, grid[i], c);
      if (s) {
        s->starts_used = first[i].starts_used;
        s->iterations += first[i].iterations;
        out.points[i] = std::move(*s);
        return;
      }
    }
  });

  for (const auto& s : out.points) {
    switch (s.status) {
      case PointStatus::mapped: ++out.mapped; break;
      case PointStatus::excluded_zero_weight: ++out.excluded_zero_weight; break;
      case PointStatus::excluded_no_preimage: ++out.excluded_no_preimage; break;
      case PointStatus::unresolved_budget: ++out.unresolved; break;
    }
  }
  for (std::size_t i = 0; i < out.points.size(); ++i) {
    if (out.points[i].status != PointStatus::mapped) continue;
    for (std::size_t j = i + 1; j < out.points.size(); ++j) {
      if (out.points[j].status != PointStatus::mapped) continue;
      double dw = 0.0, dz = 0.0;
      for (std::size_t k = 0; k < grid[i].size(); ++k) {
        dw = std::max(dw, std::abs(out.points[i].w[k] - out.points[j].w[k]));
        dz = std::max(dz, std::abs(grid[i][k] - grid[j][k]));
      }
      if (dw < 10.0 * cfg.tol && dz > 0.0) out.injectivity_violations.emplace_back(i, j);
    }
  }
  if (maps.symbolic_zero_set) {
    bool match = true;
    for (const auto& s : out.points) {
      bool on_set = false;
      for (std::size_t j : *maps.symbolic_zero_set) on_set = on_set || s.z[j] == 0.0;
      match = match && (on_set == (s.status == PointStatus::excluded_zero_weight));
    }
    out.exclusion_matches_symbolic = match;
  }
  return out;
}

std::function<Point(PointView)> reconstructed_map(const RatioMaps& maps, const BoundedDomain& target,
                                                  const SolverConfig& cfg, Point warm_start) {
  return [&maps, &target, cfg, warm_start](PointView z) {
    SolverConfig c = cfg;
    c.starts = 0;
    PointSolution s = solve_point(maps, target, z, c, 0, warm_start);
    if (s.status != PointStatus::mapped) {
      c.starts = cfg.starts;
      s = solve_point(maps, target, z, c, 0, warm_start);
    }
    if (s.status != PointStatus::mapped) throw Error("reconstructed map has no preimage at a stencil point");
    return s.w;
  };
}

ModulusIdentityResult verify_modulus_identity(const IsometryOracle& T,
                                              const std::vector<std::pair<Point, Point>>& pairs,
                                              const std::vector<LaurentPolynomial>& tests,
                                              const std::function<cplx(PointView)>& jacobian_F) {
  ModulusIdentityResult out;
  std::vector<HoloFunction> images;
  for (const auto& t : tests) images.push_back(T.apply(HoloFunction(t)));
  for (const auto& [z, w] : pairs) {
    const double jac = std::pow(std::abs(jacobian_F(z)), 2.0 / T.p);
    for (std::size_t i = 0; i < tests.size(); ++i) {
      double lhs = 0.0, rhs = 0.0;
      try {
        rhs = std::abs(tests[i](z));
        lhs = std::abs(images[i](w)) * jac;
      } catch (const PoleError&) {
        continue;
      }
      if (rhs == 0.0) continue;
      const double err = std::abs(lhs - rhs) / rhs;
      out.max_relative_error = std::max(out.max_relative_error, err);
      ++out.evaluations;
    }
  }
  if (out.evaluations == 0) out.warning = "no test was nonzero at the supplied points";
  return out;
}

Proportionality verify_proportionality(const IsometryOracle& T, PointView z, PointView w,
                                       const std::vector<LaurentPolynomial>& tests, double threshold) {
  std::vector<cplx> r;
  for (const auto& t : tests) {
    cplx fz;
    try {
      fz = t(z);
    } catch (const PoleError&) {
      continue;
    }
    if (std::abs(fz) <= threshold) continue;
    try {
      r.push_back(T.apply(HoloFunction(t))(w) / fz);
    } catch (const PoleError&) {
      continue;
    }
  }
  if (r.empty()) throw InvalidArgument("every test vanishes at z; proportionality cannot be certified");
  Proportionality out;
  out.used = r.size();
  cplx mean = 0.0;
  for (const auto& x : r) mean += x;
  mean /= static_cast<double>(r.size());
  out.lambda = mean;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (std::size_t j = i + 1; j < r.size(); ++j) out.spread = std::max(out.spread, std::abs(r[i] - r[j]));
  }
  out.spread /= std::abs(mean);
  return out;
}

}  // namespace apiso
