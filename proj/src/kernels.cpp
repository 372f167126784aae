#include "nlreg/kernels.hpp"

#include "nlreg/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

namespace nlreg {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

constexpr double kDiagonalTol = 1e-14;

}  // namespace

void PVConfig::validate() const {
  if (!(eps > 0.0 && eps < delta_sd && delta_sd < R))
    throw Error(Errc::InvalidArgument, "PVConfig needs 0 < eps < delta_sd < R");
  if (!(panel_width > 0.0) || angular_nodes < 1 || !(tol > 0.0))
    throw Error(Errc::InvalidArgument, "PVConfig panel width, nodes and tolerance must be positive");
}

AnisotropyDensity AnisotropyDensity::constant(double value) {
  return {fmt::format("{}", value), [value](const Vec&) { return value; },
          std::min(value, 1.0 / value)};
}

AnisotropyDensity AnisotropyDensity::cosine(double eps) {
  return {fmt::format("1+{}cos(2t)", eps),
          [eps](const Vec& t) {
            const double angle = std::atan2(t(1), t(0));
            return 1.0 + eps * std::cos(2.0 * angle);
          },
          std::min(1.0 - std::abs(eps), 1.0 / (1.0 + std::abs(eps)))};
}

AnisotropyDensity AnisotropyDensity::frozen_jacobian(const Mat& jacobian, double s) {
  const int n = static_cast<int>(jacobian.rows());
  const Eigen::JacobiSVD<Mat> svd(jacobian);
  const double smax = svd.singularValues()(0), smin = svd.singularValues()(n - 1);
  const double lo = std::pow(smax, -n - 2.0 * s), hi = std::pow(smin, -n - 2.0 * s);
  return {"|J theta|^{-N-2s}",
          [jacobian, n, s](const Vec& t) { return std::pow((jacobian * t).norm(), -n - 2.0 * s); },
          std::min(lo, 1.0 / hi)};
}

AnisotropyDensity::Check AnisotropyDensity::check(int dim, int samples) const {
  Check c;
  c.min_value = std::numeric_limits<double>::infinity();
  c.max_value = 0.0;
  for (const Direction& d : half_sphere_rule(dim, samples)) {
    const double plus = a(d.theta), minus = a(-d.theta);
    c.even_residual = std::max(c.even_residual, std::abs(plus - minus));
    c.min_value = std::min({c.min_value, plus, minus});
    c.max_value = std::max({c.max_value, plus, minus});
  }
  c.ok = c.even_residual <= 1e-12 * std::max(1.0, c.max_value) &&
         c.min_value >= ellipticity * (1 - 1e-12) && c.max_value <= (1 + 1e-12) / ellipticity;
  return c;
}

double mu1(const Vec& x, const Vec& y, double s) {
  return std::pow((x - y).norm(), -static_cast<double>(x.size()) - 2.0 * s);
}

std::vector<Direction> half_sphere_rule(int dim, int nodes) {
  if (dim == 1) return {Direction{make_vec({1.0}), 1.0}};
  if (dim == 2) {
    std::vector<Direction> out;
    out.reserve(nodes);
    const double w = std::numbers::pi / nodes;
    for (int k = 0; k < nodes; ++k) {
      const double angle = w * (k + 0.5);
      out.push_back(Direction{make_vec({std::cos(angle), std::sin(angle)}), w});
    }
    return out;
  }
  throw Error(Errc::InvalidArgument, "angular quadrature is implemented for N <= 2");
}

Kernel::Kernel(Variant v, double s, int dim, double kappa)
    : v_(std::move(v)), s_(s), dim_(dim), kappa_(kappa) {
  if (!(s > 0.0 && s < 1.0)) throw Error(Errc::InvalidArgument, "kernel order s must lie in (0,1)");
  if (dim < 1 || dim > kMaxDim) throw Error(Errc::InvalidArgument, "kernel dimension must be 1..3");
  if (!(kappa > 0.0)) throw Error(Errc::InvalidArgument, "ellipticity kappa must be positive");
}

Kernel Kernel::mu(double s, int dim, AnisotropyDensity b) {
  const double kappa = b.ellipticity;
  return Kernel(Mu{std::move(b)}, s, dim, kappa);
}

Kernel Kernel::perturbed(double s, int dim, AnisotropyDensity a,
                         std::function<double(const Vec&, const Vec&)> lambda, std::string name,
                         double kappa) {
  return Kernel(Perturbed{std::move(a), std::move(lambda), std::move(name)}, s, dim, kappa);
}

Kernel Kernel::diffeo(std::shared_ptr<const Diffeomorphism> map, std::shared_ptr<const Kernel> base,
                      int tau_nodes) {
  if (map->dim() != base->dim()) throw Error(Errc::InvalidArgument, "map/base dimension mismatch");
  const double s = base->s();
  const int dim = base->dim();
  const double kappa = base->kappa();
  return Kernel(Diffeo{std::move(map), std::move(base), tau_nodes}, s, dim, kappa);
}

Kernel Kernel::rescaled(std::shared_ptr<const Kernel> base, double rho, const Vec& x0) {
  const double s = base->s();
  const int dim = base->dim();
  const double kappa = base->kappa();
  return Kernel(Rescaled{rho, x0, std::move(base)}, s, dim, kappa);
}

Kernel Kernel::general(double s, int dim, std::function<double(const Vec&, const Vec&)> k,
                       double tail_exponent, std::string name, double kappa) {
  return Kernel(General{std::move(k), tail_exponent, std::move(name)}, s, dim, kappa);
}

double Kernel::raw(const Vec& x, const Vec& y) const {
  return std::visit(
      Overloaded{
          [&](const Mu& m) {
            const Vec d = x - y;
            const double r = d.norm();
            return std::pow(r, -dim_ - 2.0 * s_) * m.b(d / r);
          },
          [&](const Perturbed& p) {
            const Vec d = x - y;
            const double r = d.norm();
            return std::pow(r, -dim_ - 2.0 * s_) * (p.a(d / r) + p.lambda(x, y));
          },
          [&](const Diffeo& d) { return d.base->raw(d.map->map(x), d.map->map(y)); },
          [&](const Rescaled& r) {
            return std::pow(r.rho, dim_ + 2.0 * s_) * r.base->raw(r.rho * x + r.x0, r.rho * y + r.x0);
          },
          [&](const General& g) { return g.k(x, y); },
      },
      v_);
}

double Kernel::operator()(const Vec& x, const Vec& y) const {
  if ((x - y).norm() < kDiagonalTol) throw Error(Errc::DiagonalPoint, "K(x, y) evaluated at x = y");
  return raw(x, y);
}

double Kernel::polar(const Vec& x, double r, const Vec& theta) const {
  return std::visit(
      Overloaded{
          [&](const Mu& m) { return m.b(theta); },
          [&](const Perturbed& p) { return p.a(theta) + p.lambda(x, x + r * theta); },
          [&](const Diffeo& d) {
            // Mean Jacobian along the segment: (Phi(x + r theta) - Phi(x)) / r.
            Vec w;
            if (r == 0.0) {
              w = d.map->jacobian(x) * theta;
            } else {
              constexpr int kPanelNodes = 4;
              const int panels = std::max(1, d.tau_nodes / kPanelNodes);
              const quad::Rule& rule = quad::gauss_legendre(kPanelNodes);
              w = Vec::Zero(dim_);
              for (int p = 0; p < panels; ++p) {
                const double a = static_cast<double>(p) / panels, half = 0.5 / panels;
                for (int k = 0; k < kPanelNodes; ++k) {
                  const double tau = a + half * (1.0 + rule.nodes[k]);
                  w += (rule.weights[k] * half) * (d.map->jacobian(x + (tau * r) * theta) * theta);
                }
              }
            }
            const double len = w.norm();
            return std::pow(len, -dim_ - 2.0 * s_) * d.base->polar(d.map->map(x), r * len, w / len);
          },
          [&](const Rescaled& sc) { return sc.base->polar(sc.rho * x + sc.x0, sc.rho * r, theta); },
          [&](const General& g) {
            if (r == 0.0) throw Error(Errc::NoZeroLimit, "general kernels have no r = 0 limit");
            // Far out in a mapped tail K underflows before r^{N+2s} overflows; avoid 0 * inf.
            const double kv = g.k(x, x + r * theta);
            return kv == 0.0 ? 0.0 : std::pow(r, dim_ + 2.0 * s_) * kv;
          },
      },
      v_);
}

double Kernel::polar_even(const Vec& x, double r, const Vec& theta) const {
  return 0.5 * (polar(x, r, theta) + polar(x, r, -theta));
}

double Kernel::polar_odd(const Vec& x, double r, const Vec& theta) const {
  if (is_even_translation_invariant()) return 0.0;
  return 0.5 * (polar(x, r, theta) - polar(x, r, -theta));
}

bool Kernel::has_zero_limit() const {
  return std::visit(Overloaded{
                        [](const Mu&) { return true; },
                        [](const Perturbed&) { return true; },
                        [](const Diffeo& d) { return d.base->has_zero_limit(); },
                        [](const Rescaled& r) { return r.base->has_zero_limit(); },
                        [](const General&) { return false; },
                    },
                    v_);
}

const AnisotropyDensity& Kernel::density() const {
  if (const auto* m = std::get_if<Mu>(&v_)) return m->b;
  throw Error(Errc::InvalidArgument, "kernel has no single density");
}

std::string Kernel::describe() const {
  return std::visit(
      Overloaded{
          [&](const Mu& m) { return fmt::format("mu_b(b={}, s={}, N={})", m.b.name, s_, dim_); },
          [&](const Perturbed& p) { return fmt::format("perturbed({}, a={}, s={})", p.name, p.a.name, s_); },
          [&](const Diffeo& d) { return fmt::format("diffeo(base={})", d.base->describe()); },
          [&](const Rescaled& r) { return fmt::format("rescaled(rho={}, base={})", r.rho, r.base->describe()); },
          [&](const General& g) { return fmt::format("general({}, s={})", g.name, s_); },
      },
      v_);
}

Vec drift_field(const Kernel& k, const Vec& x, const PVConfig& cfg) {
  const int n = k.dim();
  const double s = k.s();
  const double factor = positive_part(2.0 * s - 1.0);
  Vec j = Vec::Zero(n);
  if (factor == 0.0 || k.is_even_translation_invariant()) return j;

  for (const Direction& dir : half_sphere_rule(n, cfg.angular_nodes)) {
    auto integrand = [&](double r) { return k.polar_odd(x, r, dir.theta) * std::pow(r, -2.0 * s); };
    // lambda_o vanishes linearly at r = 0.
    double total = k.polar_odd(x, cfg.eps, dir.theta) * std::pow(cfg.eps, 1.0 - 2.0 * s) / (2.0 - 2.0 * s);
    double outer = cfg.eps, last = 0.0;
    while (outer < cfg.R) {
      const double next = std::min(2.0 * outer, cfg.R);
      const auto breaks = quad::graded_breaks(outer, next, next - outer, cfg.panel_width);
      last = quad::integrate_panels(integrand, breaks, cfg.tol, cfg.max_depth);
      total += last;
      outer = next;
    }
    if (std::abs(last) > cfg.cauchy_tol * std::max(1.0, std::abs(total)))
      throw Error(Errc::NonconvergentPV,
                  fmt::format("odd-part annulus [R/2, R] contributes {:.3e} (total {:.3e})", last, total));
    total += quad::integrate(integrand, cfg.R, std::numeric_limits<double>::infinity(), cfg.tol, cfg.max_depth);
    j += (4.0 * dir.weight * total) * dir.theta;
  }
  return factor * j;
}

KernelClassReport verify_kernel_class(const Kernel& k, const AnisotropyDensity& a, const Vec& center,
                                      double radius, int samples, std::uint64_t seed) {
  if (samples < 100) throw Error(Errc::InvalidArgument, "verify_kernel_class needs >= 100 samples");
  const int n = k.dim();
  const double s = k.s();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  auto sample_point = [&]() {
    for (;;) {
      Vec p(n);
      for (int i = 0; i < n; ++i) p(i) = unif(rng);
      if (p.squaredNorm() <= 1.0) return Vec(center + radius * p);
    }
  };
  KernelClassReport rep;
  rep.kappa_fit = std::numeric_limits<double>::infinity();
  for (int i = 0; i < samples;) {
    const Vec x = sample_point(), y = sample_point();
    const Vec d = x - y;
    const double r = d.norm();
    if (r < 1e-10) continue;
    ++i;
    const double ref = mu1(x, y, s);
    const double kxy = k(x, y), kyx = k(y, x);
    const double mua = ref * a(d / r);
    rep.kappa_fit = std::min({rep.kappa_fit, kxy / ref, ref / kxy});
    rep.lambda_sup = std::max(rep.lambda_sup, std::abs(kxy - mua) / ref);
    rep.symmetry_residual = std::max(rep.symmetry_residual, std::abs(kxy - kyx) / ref);
  }
  rep.samples = samples;
  return rep;
}

CoercivityFunctional anisotropy_coercivity(const AnisotropyDensity& b, double s, int dim,
                                           int eta_samples) {
  CoercivityFunctional out;
  if (dim == 1) {
    out.inf_value = b(make_vec({1.0})) + b(make_vec({-1.0}));
    out.reference = 2.0 * b.ellipticity;
  } else if (dim == 2) {
    constexpr int kNodes = 512;
    auto sphere_integral = [&](const Vec& eta, bool weighted) {
      double sum = 0.0;
      for (int k = 0; k < kNodes; ++k) {
        const double angle = 2.0 * std::numbers::pi * (k + 0.5) / kNodes;
        const Vec theta = make_vec({std::cos(angle), std::sin(angle)});
        sum += std::pow(std::abs(eta.dot(theta)), 2.0 * s) * (weighted ? b(theta) : 1.0);
      }
      return sum * 2.0 * std::numbers::pi / kNodes;
    };
    out.inf_value = std::numeric_limits<double>::infinity();
    for (int k = 0; k < eta_samples; ++k) {
      const double angle = std::numbers::pi * k / eta_samples;
      out.inf_value = std::min(out.inf_value, sphere_integral(make_vec({std::cos(angle), std::sin(angle)}), true));
    }
    out.reference = b.ellipticity * sphere_integral(make_vec({1.0, 0.0}), false);
  } else {
    throw Error(Errc::InvalidArgument, "anisotropy_coercivity supports N <= 2");
  }
  out.holds = out.inf_value >= out.reference * (1.0 - 1e-12);
  return out;
}

}  // namespace nlreg
