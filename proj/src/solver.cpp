#include "nlreg/solver.hpp"

#include "nlreg/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlreg {

SolveResult solve(const StiffnessSystem& sys, const SolveOptions& opts) {
  const Eigen::MatrixXd& A = sys.A;
  const Eigen::VectorXd& b = sys.rhs;
  const Eigen::Index n = A.rows();
  const int max_iter = opts.max_iter > 0 ? opts.max_iter : static_cast<int>(10 * n);

  Eigen::VectorXd inv_diag = Eigen::VectorXd::Ones(n);
  if (opts.jacobi) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(A(i, i) > 0.0))
        throw Error(Errc::NotPositiveDefinite,
                    fmt::format("diagonal entry {} has Rayleigh quotient {:.6e}", i, A(i, i)));
      inv_diag(i) = 1.0 / A(i, i);
    }
  }

  SolveResult out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm > 0.0) {
    Eigen::VectorXd r = b;
    Eigen::VectorXd z = inv_diag.cwiseProduct(r);
    Eigen::VectorXd p = z;
    Eigen::VectorXd Ap(n);
    double rz = r.dot(z);
    out.residual = 1.0;
    int it = 0;
    for (; it < max_iter; ++it) {
      Ap.noalias() = A * p;
      const double pAp = p.dot(Ap);
      if (!(pAp > 0.0))
        throw Error(Errc::NotPositiveDefinite,
                    fmt::format("search direction with Rayleigh quotient {:.6e} at iteration {}; the potential is "
                                "too negative for the form to be coercive",
                                pAp / p.squaredNorm(), it));
      const double alpha = rz / pAp;
      x += alpha * p;
      r -= alpha * Ap;
      out.residual = r.norm() / bnorm;
      if (out.residual <= opts.tol) break;
      z = inv_diag.cwiseProduct(r);
      const double rz_next = r.dot(z);
      p = z + (rz_next / rz) * p;
      rz = rz_next;
    }
    out.iterations = it + 1;
    if (out.residual > opts.tol)
      throw Error(Errc::MaxIterExceeded,
                  fmt::format("relative residual {:.3e} after {} iterations (tol {:.1e})", out.residual, max_iter, opts.tol));
  }

  Eigen::VectorXd values = sys.g_box;
  for (std::size_t a = 0; a < sys.active.size(); ++a)
    values(static_cast<Eigen::Index>(sys.active[a])) = x(static_cast<Eigen::Index>(a));
  out.u = DiscreteField(sys.op.grid, std::move(values), sys.exterior);
  return out;
}

namespace {

Eigen::VectorXd active_values(const StiffnessSystem& sys, const DiscreteField& u) {
  if (!u.grid().same_layout(sys.op.grid)) throw Error(Errc::GridMismatch, "field and system grids differ");
  Eigen::VectorXd x(static_cast<Eigen::Index>(sys.active.size()));
  for (std::size_t a = 0; a < sys.active.size(); ++a) x(static_cast<Eigen::Index>(a)) = u[sys.active[a]];
  return x;
}

/// Weight analytic integral over |t| < 2h missing from far pair sums (see hs_seminorm).
double near_weight_1d(double s, double h) {
  const double p = 2.0 - 2.0 * s;
  return std::pow(h, p) * (1.0 / p + 2.0 * (std::pow(2.0, p) - 1.0) / p - (std::pow(2.0, p + 1.0) - 1.0) / (p + 1.0));
}

}  // namespace

double galerkin_residual(const StiffnessSystem& sys, const DiscreteField& u) {
  const Eigen::VectorXd x = active_values(sys, u);
  const Eigen::VectorXd r = sys.A * x - sys.rhs;
  const double scale = sys.rhs.cwiseAbs().maxCoeff();
  return scale > 0.0 ? r.cwiseAbs().maxCoeff() / scale : r.cwiseAbs().maxCoeff();
}

double discrete_energy(const StiffnessSystem& sys, const DiscreteField& u) {
  const Eigen::VectorXd x = active_values(sys, u);
  return x.dot(sys.A * x) - x.dot(sys.potential.cwiseProduct(x));
}

LocalizeResult localize(const DiscreteField& u, const Kernel& k, double R, const ScalarSource& f,
                        const std::vector<Vec>& samples, const PVConfig& cfg_in) {
  const int n = k.dim();
  const double s = k.s();
  const Cutoff phi{R, Vec::Zero(n)};
  const Cutoff phi_half{0.5 * R, Vec::Zero(n)};
  PVConfig cfg = cfg_in;
  cfg.delta_sd = std::max(cfg.delta_sd, 8.0 * u.grid().h());
  cfg.eps = std::min(cfg.eps, 0.5 * cfg.delta_sd);
  const ScalarFn uf = u.as_function();

  LocalizeResult out;
  out.v = [phi, uf](const Vec& x) { return phi(x) * uf(x); };
  out.G = [=, &k](const Vec& x) {
    const double cut = phi_half(x);
    if (cut == 0.0) return 0.0;
    const double px = phi(x);
    // phi_R = 1 on B_R, so the integrand vanishes for r < R - |x|.
    const double start = std::max(R - x.norm(), 1e-12);
    const double inf = std::numeric_limits<double>::infinity();
    double total = 0.0;
    for (const Direction& d : half_sphere_rule(n, cfg.angular_nodes)) {
      auto integrand = [&](double r) {
        const Vec yp = x + r * d.theta, ym = x - r * d.theta;
        return (uf(yp) * (px - phi(yp)) * k.polar(x, r, d.theta) +
                uf(ym) * (px - phi(ym)) * k.polar(x, r, -d.theta)) *
               std::pow(r, -1.0 - 2.0 * s);
      };
      const auto breaks = quad::graded_breaks(start, std::max(cfg.R, 4.0 * R), std::min(cfg.panel_width, 0.125 * R),
                                              cfg.panel_width);
      double sum = quad::integrate_panels(integrand, breaks, cfg.tol, cfg.max_depth);
      sum += quad::integrate(integrand, breaks.back(), inf, cfg.tol, cfg.max_depth);
      total += d.weight * sum;
    }
    return cut * total;
  };
  for (const Vec& x : samples) {
    if (x.norm() >= 0.5 * R) throw Error(Errc::InvalidArgument, "localize samples must lie in B_{R/2}");
    const double lv = apply_point(k, out.v, x, cfg);
    const double lu = apply_point(k, uf, x, cfg);
    const double g = out.G(x);
    out.identity_residual = std::max(out.identity_residual, std::abs(lv - phi(x) * lu - g));
    out.solution_residual = std::max(out.solution_residual, std::abs(lv - f.f(x) - g));
  }
  return out;
}

CaccioppoliReport caccioppoli(const DiscreteField& v, const Kernel& k, const ScalarSource& f, const Cutoff& phi,
                              double eps) {
  const Grid& g = v.grid();
  if (g.dim() != 1) throw Error(Errc::InvalidArgument, "the discrete Caccioppoli check is implemented for N = 1");
  if (v.far_field().kind != FarField::Kind::Zero)
    throw Error(Errc::InvalidArgument, "the Caccioppoli check needs zero exterior data");
  if (!(eps > 0.0 && eps < 1.0)) throw Error(Errc::InvalidArgument, "eps must lie in (0, 1)");
  const int n = g.extent(0);
  const double h = g.h(), s = k.s();
  const double lo = g.lo()(0), hi = g.hi()(0);
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> x(n), val(n), w(n), ph(n);
  for (int i = 0; i < n; ++i) {
    x[i] = lo + i * h;
    val[i] = v[static_cast<std::size_t>(i)];
    w[i] = (i == 0 || i == n - 1) ? 0.5 * h : h;
    ph[i] = phi(make_vec({x[i]}));
  }
  auto K = [&](double a, double b) { return k(make_vec({a}), make_vec({b})); };
  const double near = near_weight_1d(s, h);

  double pair_lhs = 0.0, pair_rhs = 0.0;
#pragma omp parallel for reduction(+ : pair_lhs, pair_rhs) schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (std::abs(i - j) < 2) continue;
      const double kij = K(x[i], x[j]);
      const double dv = val[i] - val[j], dp = ph[i] - ph[j];
      pair_lhs += w[i] * w[j] * dv * dv * ph[j] * ph[j] * kij;
      pair_rhs += w[i] * w[j] * val[i] * val[i] * dp * dp * kij;
    }
  }
  // Near-diagonal strip with local slopes and the frozen kernel coefficient.
  for (int i = 0; i < n; ++i) {
    for (int side : {-1, 1}) {
      const int j = i + side;
      if (j < 0 || j >= n) continue;
      const double coef = K(x[i], x[j]) * std::pow(h, 1.0 + 2.0 * s);
      const double sv = (val[j] - val[i]) / h, sp = (ph[j] - ph[i]) / h;
      pair_lhs += w[i] * ph[i] * ph[i] * sv * sv * near * coef;
      pair_rhs += w[i] * val[i] * val[i] * sp * sp * near * coef;
    }
  }
  // Pairs with one point outside the box, where v = 0.
  double ext_lhs = 0.0, ext_rhs = 0.0;
  for (int i = 0; i < n; ++i) {
    if (val[i] == 0.0) continue;
    auto out_integral = [&](auto&& weight) {
      return quad::integrate([&](double t) { return weight(hi + t) * K(x[i], hi + t); }, 0.0, inf, 1e-10) +
             quad::integrate([&](double t) { return weight(lo - t) * K(x[i], lo - t); }, 0.0, inf, 1e-10);
    };
    const double mass = out_integral([](double) { return 1.0; });
    const double phi_out = out_integral([&](double y) { return std::pow(phi(make_vec({y})), 2); });
    const double diff_out = out_integral([&](double y) { return std::pow(ph[i] - phi(make_vec({y})), 2); });
    // (v(x) - v(y))^2 phi^2(y): y outside gives v(x)^2 phi(y)^2; x outside gives v(y)^2 phi(y)^2.
    ext_lhs += w[i] * val[i] * val[i] * (phi_out + ph[i] * ph[i] * mass);
    ext_rhs += w[i] * val[i] * val[i] * diff_out;
  }

  double source = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    std::vector<double> breaks{x[i], x[i + 1]};
    for (const Vec& p : f.singularities)
      if (p(0) > x[i] && p(0) < x[i + 1]) breaks.insert(breaks.begin() + 1, p(0));
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      source += quad::integrate_singular(
          [&](double t) {
            const double lam = (t - x[i]) / h;
            const double vt = (1.0 - lam) * val[i] + lam * val[i + 1];
            const double pt = phi(make_vec({t}));
            return std::abs(f.f(make_vec({t}))) * std::abs(vt) * pt * pt;
          },
          breaks[b], breaks[b + 1], 1e-9);
    }
  }

  CaccioppoliReport rep;
  rep.lhs = (1.0 - eps) * (pair_lhs + ext_lhs);
  rep.rhs = source + (pair_rhs + ext_rhs) / eps;
  return rep;
}

}  // namespace nlreg
