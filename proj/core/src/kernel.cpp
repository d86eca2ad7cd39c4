#include "apiso/kernel.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "apiso/rng.hpp"

namespace apiso {

namespace {

std::string index_string(const MultiIndex& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

// Objective restricted to the slice c = c0 + N y:
//   Phi(y) = sum_q W_q (|u_q|^2 + eps^2)^{p/2},  u = u0 + B y.
struct Slice {
  Eigen::VectorXcd u0;
  Eigen::MatrixXcd B;
  Eigen::VectorXd W;
  double p = 1.0;
  double eps2 = 0.0;

  Eigen::Index dim() const { return B.cols(); }

  double value(const Eigen::VectorXcd& y, double e2) const {
    const Eigen::VectorXcd u = u0 + B * y;
    double sum = 0.0;
    for (Eigen::Index q = 0; q < u.size(); ++q) {
      const double s = std::norm(u(q)) + e2;
      sum += W(q) * (p == 2.0 ? s : std::pow(s, p / 2.0));
    }
    return sum;
  }

  // Real gradient and Hessian in coordinates x = (Re y, Im y).
  void derivatives(const Eigen::VectorXcd& y, Eigen::VectorXd& g, Eigen::MatrixXd& H) const {
    const Eigen::Index d = dim();
    const Eigen::VectorXcd u = u0 + B * y;
    Eigen::VectorXd h1(u.size()), h2(u.size());
    for (Eigen::Index q = 0; q < u.size(); ++q) {
      const double s = std::norm(u(q)) + eps2;
      h1(q) = W(q) * (p / 2.0) * std::pow(s, p / 2.0 - 1.0);
      h2(q) = W(q) * (p / 2.0) * (p / 2.0 - 1.0) * std::pow(s, p / 2.0 - 2.0);
    }
    const Eigen::VectorXcd G = 2.0 * (B.adjoint() * (h1.cast<cplx>().array() * u.array()).matrix());
    g.resize(2 * d);
    g.head(d) = G.real();
    g.tail(d) = G.imag();

    const Eigen::MatrixXcd C = B.adjoint() * (h1.cast<cplx>().asDiagonal() * B);
    const Eigen::MatrixXd P1 = C.real();
    const Eigen::MatrixXd P2 = -C.imag();
    H.resize(2 * d, 2 * d);
    H.topLeftCorner(d, d) = 2.0 * P1;
    H.bottomRightCorner(d, d) = 2.0 * P1;
    H.topRightCorner(d, d) = 2.0 * P2;
    H.bottomLeftCorner(d, d) = 2.0 * P2.transpose();
    if (p != 2.0) {
      const Eigen::MatrixXcd Z = B.conjugate().array().colwise() * u.array();
      Eigen::MatrixXd Zr(Z.rows(), 2 * d);
      Zr.leftCols(d) = Z.real();
      Zr.rightCols(d) = Z.imag();
      H.noalias() += 4.0 * Zr.transpose() * (h2.asDiagonal() * Zr);
    }
  }
};

struct NewtonResult {
  Eigen::VectorXcd y;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

Eigen::VectorXcd to_complex(const Eigen::VectorXd& x) {
  const Eigen::Index d = x.size() / 2;
  Eigen::VectorXcd y(d);
  for (Eigen::Index i = 0; i < d; ++i) y(i) = cplx(x(i), x(d + i));
  return y;
}

NewtonResult damped_newton(const Slice& s, Eigen::VectorXcd y, int max_iterations, double tol) {
  NewtonResult r;
  const Eigen::Index n = 2 * s.dim();
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  double f = s.value(y, s.eps2);
  for (int it = 0; it < max_iterations; ++it) {
    s.derivatives(y, g, H);
    r.grad_norm = g.norm();
    r.iterations = it;
    if (r.grad_norm <= tol * std::max(f, 1e-300)) {
      r.converged = true;
      break;
    }
    // Shift until the system is positive definite and yields a descent direction.
    const double scale = std::max(H.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    double mu = 0.0;
    Eigen::VectorXd step;
    for (int attempt = 0; attempt < 30; ++attempt) {
      Eigen::LLT<Eigen::MatrixXd> llt(H + mu * Eigen::MatrixXd::Identity(n, n));
      if (llt.info() == Eigen::Success) {
        step = -llt.solve(g);
        if (step.allFinite() && step.dot(g) < 0.0) break;
      }
      mu = mu == 0.0 ? 1e-12 * scale : mu * 10.0;
      step.resize(0);
    }
    if (step.size() == 0) step = -g / scale;

    const double slope = step.dot(g);
    double t = 1.0;
    bool accepted = false;
    const Eigen::VectorXcd dy = to_complex(step);
    for (int ls = 0; ls < 60; ++ls) {
      const Eigen::VectorXcd trial = y + t * dy;
      const double ft = s.value(trial, s.eps2);
      if (ft <= f + 1e-4 * t * slope) {
        accepted = ft < f || t * step.norm() <= 1e-15 * (1.0 + y.norm());
        y = trial;
        f = ft;
        break;
      }
      t *= 0.5;
    }
    r.iterations = it + 1;
    if (!accepted) {
      // No representable decrease left: accept a roundoff-limited stationary point.
      r.converged = r.grad_norm <= std::sqrt(tol) * std::max(f, 1e-300);
      break;
    }
    if (t * step.norm() <= 1e-15 * (1.0 + y.norm())) {
      s.derivatives(y, g, H);
      r.grad_norm = g.norm();
      r.converged = r.grad_norm <= tol * std::max(f, 1e-300);
      break;
    }
  }
  r.y = y;
  return r;
}

}  // namespace

LaurentPolynomial BasisSpec::combination(const std::vector<cplx>& coefficients) const {
  if (coefficients.size() != indices.size()) throw InvalidArgument("one coefficient per basis element is required");
  if (indices.empty()) return {};
  LaurentPolynomial f(indices.front().size());
  for (std::size_t k = 0; k < indices.size(); ++k) f.add_term(indices[k], coefficients[k]);
  return f;
}

BasisSpec make_basis(const BoundedDomain& domain, std::vector<MultiIndex> indices, double p) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  if (indices.empty()) throw InvalidArgument("basis must not be empty");
  std::set<MultiIndex> seen;
  for (const auto& a : indices) {
    if (a.size() != domain.dimension()) throw InvalidArgument("basis index " + index_string(a) + " has wrong length");
    if (!seen.insert(a).second) throw InvalidArgument("basis index " + index_string(a) + " is repeated");
    if (domain.spec()) {
      try {
        (void)monomial_integral_closed(*domain.spec(), a, p);
      } catch (const DivergentIntegral&) {
        throw InvalidArgument("basis element z^" + index_string(a) + " has infinite " + std::to_string(p) +
                              "-norm on " + domain.label());
      }
    }
  }
  BasisSpec b;
  b.indices = std::move(indices);
  b.domain_label = domain.label();
  b.p = p;
  return b;
}

std::vector<MultiIndex> tensor_degree_indices(std::size_t n, int degree, int min_exp) {
  if (degree < min_exp) throw InvalidArgument("degree must be >= min exponent");
  std::vector<MultiIndex> out;
  MultiIndex a(n, min_exp);
  while (true) {
    out.push_back(a);
    std::size_t j = 0;
    while (j < n) {
      if (++a[j] <= degree) break;
      a[j] = min_exp;
      ++j;
    }
    if (j == n) break;
  }
  return out;
}

KernelEstimate bergman2_gram(const BoundedDomain& domain, const BasisSpec& basis, PointView z) {
  if (basis.p != 2.0) throw InvalidArgument("the Gram path needs p = 2");
  if (!domain.radial_profile()) {
    throw UnsupportedDomain("monomials are only known to be orthogonal on Reinhardt domains; " + domain.label() +
                            " has no radial profile");
  }
  if (!domain.contains(z)) throw InvalidArgument("kernel point is not in " + domain.label());
  KernelEstimate est;
  est.z = Point(z.begin(), z.end());
  est.basis = basis;
  est.method = "gram";
  est.coefficients.resize(basis.indices.size());
  double total = 0.0;
  for (std::size_t k = 0; k < basis.indices.size(); ++k) {
    const auto& a = basis.indices[k];
    const double norm2 = domain.spec() ? monomial_norm_closed(domain, a, 2.0).integral
                                       : quadrature_norm(domain, LaurentPolynomial::monomial(a), 2.0).integral;
    const cplx v = eval_monomial(a, z);
    total += std::norm(v) / norm2;
    est.coefficients[k] = std::conj(v) / norm2;
  }
  if (total == 0.0) throw NoBasisSupport("every basis element vanishes at the kernel point");
  for (auto& c : est.coefficients) c /= total;
  est.value = total;
  est.min_norm = 1.0 / std::sqrt(total);
  return est;
}

KernelEstimate pbergman_min_norm(const BoundedDomain& domain, const BasisSpec& basis, PointView z, double p,
                                 const KernelConfig& cfg) {
  if (!(p > 0.0)) throw InvalidArgument("p must be positive");
  if (basis.indices.empty()) throw InvalidArgument("basis must not be empty");
  if (!domain.contains(z)) throw InvalidArgument("kernel point is not in " + domain.label());
  const auto K = static_cast<Eigen::Index>(basis.indices.size());

  Eigen::VectorXcd a(K);
  for (Eigen::Index k = 0; k < K; ++k) a(k) = eval_monomial(basis.indices[static_cast<std::size_t>(k)], z);
  if (a.norm() == 0.0) throw NoBasisSupport("every basis element vanishes at the kernel point");

  std::vector<cplx> ones(basis.indices.size(), 1.0);
  const QuadratureRule rule = default_rule(domain, basis.combination(ones), p, cfg.quadrature);
  std::vector<Point> nodes;
  std::vector<double> weights;
  rule.materialize(nodes, weights);
  const auto Q = static_cast<Eigen::Index>(nodes.size());
  Eigen::MatrixXcd V(Q, K);
  for (Eigen::Index q = 0; q < Q; ++q) {
    for (Eigen::Index k = 0; k < K; ++k) {
      V(q, k) = eval_monomial(basis.indices[static_cast<std::size_t>(k)], nodes[static_cast<std::size_t>(q)]);
    }
  }

  Slice s;
  s.p = p;
  s.W = Eigen::Map<const Eigen::VectorXd>(weights.data(), Q);
  const Eigen::VectorXcd abar = a.conjugate();
  const Eigen::VectorXcd c0 = abar / a.squaredNorm();
  const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(abar);
  const Eigen::MatrixXcd Qfull = qr.householderQ() * Eigen::MatrixXcd::Identity(K, K);
  const Eigen::MatrixXcd N = Qfull.rightCols(K - 1);
  s.u0 = V * c0;
  s.B = V * N;

  KernelEstimate est;
  est.z = Point(z.begin(), z.end());
  est.basis = basis;
  est.method = "min_norm";

  auto finish = [&](const Eigen::VectorXcd& y, const OptimizerReport& report) {
    const double phi = s.value(y, 0.0);
    const Eigen::VectorXcd c = c0 + N * y;
    est.coefficients.assign(c.data(), c.data() + c.size());
    est.min_norm = std::pow(phi, 1.0 / p);
    est.value = 1.0 / std::pow(phi, 2.0 / p);
    est.optimizer_report = report;
    return est;
  };

  if (K == 1) return finish(Eigen::VectorXcd(0), OptimizerReport{});

  // Starting points.
  std::vector<Eigen::VectorXcd> starts;
  {
    const Eigen::MatrixXcd M = s.B.adjoint() * (s.W.cast<cplx>().asDiagonal() * s.B);
    const Eigen::VectorXcd rhs = -(s.B.adjoint() * (s.W.cast<cplx>().array() * s.u0.array()).matrix());
    Eigen::VectorXcd yg = M.ldlt().solve(rhs);
    if (!yg.allFinite()) yg = Eigen::VectorXcd::Zero(K - 1);
    starts.push_back(yg);
  }
  {
    double best = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd best_y;
    for (Eigen::Index k = 0; k < K; ++k) {
      if (std::abs(a(k)) < 1e-300) continue;
      Eigen::VectorXcd c = Eigen::VectorXcd::Zero(K);
      c(k) = 1.0 / a(k);
      const Eigen::VectorXcd y = N.adjoint() * (c - c0);
      const double v = s.value(y, 0.0);
      if (v < best) {
        best = v;
        best_y = y;
      }
    }
    if (best_y.size() > 0) starts.push_back(best_y);
  }
  if (cfg.warm_start) {
    if (cfg.warm_start->size() != basis.indices.size()) {
      throw InvalidArgument("warm start needs one coefficient per basis element");
    }
    Eigen::VectorXcd c = Eigen::Map<const Eigen::VectorXcd>(cfg.warm_start->data(), K);
    const cplx at_z = a.transpose() * c;
    if (std::abs(at_z) > 1e-300) starts.push_back(N.adjoint() * (c / at_z - c0));
  }

  // Smoothing scale from the typical modulus of the best start.
  double f_start = std::numeric_limits<double>::infinity();
  for (const auto& y : starts) f_start = std::min(f_start, s.value(y, 0.0));
  const double vol = s.W.sum();
  s.eps2 = std::pow(1e-8 * std::pow(f_start / vol, 1.0 / p), 2.0);

  OptimizerReport report;
  Eigen::VectorXcd best_y;
  double best_val = std::numeric_limits<double>::infinity();
  auto consider = [&](const Eigen::VectorXcd& y, const NewtonResult* nr) {
    const double v = s.value(y, 0.0);
    if (v < best_val) {
      best_val = v;
      best_y = y;
      if (nr) {
        report.iterations = nr->iterations;
        report.final_gradient_norm = nr->grad_norm;
        report.converged = nr->converged;
      }
    }
  };
  for (const auto& y : starts) consider(y, nullptr);

  if (p >= 1.0) {
    const NewtonResult nr = damped_newton(s, best_y, cfg.max_iterations, cfg.tol);
    consider(nr.y, nullptr);
    report.iterations = nr.iterations;
    report.final_gradient_norm = nr.grad_norm;
    report.converged = nr.converged;
  } else {
    // Nonconvex: every start, random perturbations of the Gram start, and the p = 1 solution.
    std::vector<Eigen::VectorXcd> all = starts;
    Stream rng(cfg.seed, StreamTag::kernel_restarts);
    const double spread = starts.front().norm() + 1.0;
    for (int r = 0; r < cfg.restarts; ++r) {
      Eigen::VectorXcd y = starts.front();
      for (Eigen::Index i = 0; i < y.size(); ++i) {
        y(i) += spread * cplx(rng.normal(), rng.normal()) / std::sqrt(2.0 * static_cast<double>(y.size()));
      }
      all.push_back(y);
    }
    KernelConfig sub = cfg;
    sub.restarts = 0;
    sub.warm_start.reset();
    const KernelEstimate p1 = pbergman_min_norm(domain, basis, z, 1.0, sub);
    Eigen::VectorXcd c1 = Eigen::Map<const Eigen::VectorXcd>(p1.coefficients.data(), K);
    all.push_back(N.adjoint() * (c1 - c0));
    report.restarts = static_cast<int>(all.size()) - 1;
    for (const auto& y : all) {
      const NewtonResult nr = damped_newton(s, y, cfg.max_iterations, cfg.tol);
      consider(nr.y, &nr);
    }
  }
  return finish(best_y, report);
}

std::vector<BoundaryProbeRow> boundary_probe(const BoundedDomain& domain, const std::vector<Point>& path,
                                             const BasisSpec& basis, double p, const KernelConfig& cfg) {
  std::vector<BoundaryProbeRow> rows;
  for (const auto& z : path) {
    BoundaryProbeRow row;
    row.estimate = pbergman_min_norm(domain, basis, z, p, cfg);
    row.boundary_distance = boundary_distance(domain, z, 1e-9).distance;
    row.scaled = row.estimate.value * row.boundary_distance * row.boundary_distance;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace apiso
