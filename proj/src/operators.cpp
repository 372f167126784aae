#include "nlreg/operators.hpp"

#include "nlreg/funcspace.hpp"
#include "nlreg/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace nlreg {

namespace {

/// Radial panels on [a, b]: doubling from `first`, capped at `width` up to r = 8, then r / 32.
std::vector<double> radial_panels(double a, double b, double first, double width) {
  std::vector<double> breaks{a};
  double r = a, w = first;
  while (r < b) {
    const double cap = std::max(width, r / 32.0);
    w = std::min(2.0 * w, cap);
    r = std::min(r + w, b);
    breaks.push_back(r);
  }
  return breaks;
}

struct DirectionalParts {
  double even = 0.0, odd = 0.0;
};

DirectionalParts directional(const Kernel& k, const ScalarFn& u, const Vec& x, const Vec& th, double ux,
                             const PVConfig& cfg) {
  const double s = k.s();
  const double delta = cfg.delta_sd;
  const double inf = std::numeric_limits<double>::infinity();
  DirectionalParts out;

  // Inner even part: 2u(x) - u(x+r) - u(x-r) = -u'' r^2 - u'''' r^4 / 12 + ...; the step eta
  // makes the r^4 terms cancel against the r^{1-2s} weight.
  const double eta = delta * std::sqrt((2.0 - 2.0 * s) / (4.0 - 2.0 * s));
  auto second_diff = [&](double t) { return (u(x + t * th) + u(x - t * th) - 2.0 * ux) / (t * t); };
  const double d2 = second_diff(eta);
  const double d2_half = second_diff(0.5 * eta);
  const double inner_scale = std::pow(delta, 2.0 - 2.0 * s) / (2.0 - 2.0 * s);
  if (std::abs(d2_half) > std::pow(2.0, 2.25 - 2.0 * s) * std::abs(d2) &&
      std::abs(d2_half) * inner_scale > 1e-3 * (1.0 + std::abs(ux)))
    throw Error(Errc::InsufficientRegularity,
                fmt::format("second differences grow from {:.3e} to {:.3e} when halving the step", d2, d2_half));
  const double r_mean = delta * (2.0 - 2.0 * s) / (3.0 - 2.0 * s);
  out.even = -d2 * k.polar_even(x, r_mean, th) * inner_scale;

  auto even = [&](double r) {
    return (2.0 * ux - u(x + r * th) - u(x - r * th)) * k.polar_even(x, r, th) * std::pow(r, -1.0 - 2.0 * s);
  };
  const auto breaks = radial_panels(delta, cfg.R, delta, cfg.panel_width);
  out.even += quad::integrate_panels(even, breaks, cfg.tol, cfg.max_depth);
  out.even += quad::integrate(even, cfg.R, inf, cfg.tol, cfg.max_depth);

  if (k.is_even_translation_invariant()) return out;
  const double eps = cfg.eps;
  const double g = (u(x + eps * th) - u(x - eps * th)) / (2.0 * eps);
  out.odd = -2.0 * g * k.polar_odd(x, eps, th) * std::pow(eps, 1.0 - 2.0 * s) / (2.0 - 2.0 * s);
  auto odd = [&](double r) {
    return (u(x - r * th) - u(x + r * th)) * k.polar_odd(x, r, th) * std::pow(r, -1.0 - 2.0 * s);
  };
  const auto odd_breaks = radial_panels(eps, cfg.R, eps, cfg.panel_width);
  double last = 0.0;
  for (std::size_t i = 0; i + 1 < odd_breaks.size(); ++i) {
    const double piece = quad::integrate(odd, odd_breaks[i], odd_breaks[i + 1], cfg.tol, cfg.max_depth);
    out.odd += piece;
    if (odd_breaks[i] >= 0.5 * cfg.R) last += piece;
  }
  if (std::abs(last) > cfg.cauchy_tol * std::max(1.0, std::abs(out.odd)))
    throw Error(Errc::NonconvergentPV,
                fmt::format("odd part over [R/2, R] contributes {:.3e} of {:.3e}", last, out.odd));
  out.odd += quad::integrate(odd, cfg.R, inf, cfg.tol, cfg.max_depth);
  return out;
}

}  // namespace

double apply_point(const Kernel& k, const ScalarFn& u, const Vec& x, const PVConfig& cfg) {
  cfg.validate();
  if (x.size() != k.dim()) throw Error(Errc::InvalidArgument, "point and kernel dimension differ");
  const double ux = u(x);
  double total = 0.0;
  for (const Direction& d : half_sphere_rule(k.dim(), cfg.angular_nodes)) {
    const DirectionalParts p = directional(k, u, x, d.theta, ux, cfg);
    total += d.weight * (p.even + p.odd);
  }
  if (!std::isfinite(total)) throw Error(Errc::NonconvergentPV, "principal value is not finite");
  return total;
}

double apply_point(const Kernel& k, const DiscreteField& u, const Vec& x, PVConfig cfg) {
  const double h = u.grid().h();
  cfg.delta_sd = std::max(cfg.delta_sd, 8.0 * h);
  cfg.eps = std::min(cfg.eps, 0.5 * cfg.delta_sd);
  const ScalarFn f = u.as_function();
  return apply_point(k, f, x, cfg);
}

double action_on_ds(const Kernel& k, const Domain& domain, const Vec& x, const PVConfig& cfg,
                    const ActionOnDsOptions& opts) {
  if (!domain.contains(x)) throw Error(Errc::InvalidArgument, "action_on_ds needs an interior point");
  const double s = k.s();
  if (!opts.cutoff) return apply_point(k, [&](const Vec& y) { return std::pow(domain.dist(y), s); }, x, cfg);
  Cutoff phi{2.0, opts.cutoff_center.size() ? opts.cutoff_center : Vec(Vec::Zero(domain.dim()))};
  return apply_point(k, [&](const Vec& y) { return phi(y) * std::pow(domain.dist(y), s); }, x, cfg);
}

double riesz_potential(double s, int dim, const Vec& z) {
  const double r = z.norm();
  if (r == 0.0) throw Error(Errc::Origin, "Riesz potential at z = 0");
  return std::pow(r, 2.0 * s - dim);
}

double bessel_potential(double s, double r_scale, const Vec& x) {
  if (!(r_scale > 0.0)) throw Error(Errc::InvalidArgument, "Bessel scale must be positive");
  if (!(s > 0.0)) throw Error(Errc::InvalidArgument, "Bessel order must be positive");
  const int n = static_cast<int>(x.size());
  const double rho = x.norm() / r_scale;
  if (rho == 0.0) throw Error(Errc::Origin, "Bessel potential at x = 0");
  // G = (4 pi)^{-N/2} / Gamma(s) int_0^inf t^{s - N/2 - 1} e^{-t - c/t} dt, c = rho^2 / 4.
  // With t = sqrt(c) e^v the integrand becomes e^{a v - 2 sqrt(c) cosh v}: double-exponential
  // decay on both sides, so a 64-node trapezoid rule is spectrally accurate.
  const double a = s - 0.5 * n;
  const double b = 0.5 * rho;  // sqrt(c)
  auto log_integrand = [&](double v) { return a * v - 2.0 * b * std::cosh(v); };
  const double peak_v = std::asinh(a / (2.0 * b));
  const double peak = log_integrand(peak_v);
  // Window where the integrand exceeds e^{-40} of its peak.
  auto edge = [&](double dir) {
    double lo = peak_v, step = 1.0;
    while (log_integrand(lo + dir * step) > peak - 40.0) step *= 2.0;
    double hi = lo + dir * step;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      (log_integrand(mid) > peak - 40.0 ? lo : hi) = mid;
    }
    return hi;
  };
  const double v0 = edge(-1.0), v1 = edge(1.0);
  constexpr int kNodes = 64;
  const double dv = (v1 - v0) / (kNodes - 1);
  double sum = 0.0;
  for (int i = 0; i < kNodes; ++i) {
    const double w = (i == 0 || i == kNodes - 1) ? 0.5 : 1.0;
    sum += w * std::exp(log_integrand(v0 + i * dv) - peak);
  }
  const double integral = sum * dv * std::exp(peak) * std::pow(b, a);
  return std::pow(4.0 * std::numbers::pi, -0.5 * n) / std::tgamma(s) * integral;
}

DecayEnvelope decay_envelope(const Kernel& k, const ScalarFn& psi, const std::vector<double>& radii,
                             const PVConfig& cfg) {
  DecayEnvelope env;
  env.min = std::numeric_limits<double>::infinity();
  const int n = k.dim();
  for (double r : radii) {
    const Vec x = r * unit_vec(n, 0);
    const double v = std::abs(apply_point(k, psi, x, cfg)) * (1.0 + std::pow(r, n + 2.0 * k.s()));
    env.radii.push_back(r);
    env.scaled.push_back(v);
    env.min = std::min(env.min, v);
    env.max = std::max(env.max, v);
  }
  return env;
}

}  // namespace nlreg
