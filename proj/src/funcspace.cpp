#include "nlreg/funcspace.hpp"

#include "nlreg/geometry.hpp"
#include "nlreg/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <random>

namespace nlreg {

namespace {

constexpr int kAngularNodes2d = 128;

/// Breakpoints in (0, r) at the distances from x to each singular point.
std::vector<double> radial_breaks(const Vec& x, double r, const std::vector<Vec>& singular) {
  std::vector<double> b{0.0};
  for (const Vec& p : singular) {
    const double d = (p - x).norm();
    if (d > 1e-12 * r && d < r * (1 - 1e-12)) b.push_back(d);
  }
  b.push_back(r);
  std::sort(b.begin(), b.end());
  return b;
}

/// int_{B_r(x)} g(y) w(|y - x|) dy in polar coordinates about x.
template <class W>
double ball_integral(const ScalarSource& src, int dim, const Vec& x, double r, W&& weight) {
  const std::vector<double> breaks = radial_breaks(x, r, src.singularities);
  auto radial = [&](const Vec& theta) {
    auto f = [&](double rho) {
      return std::abs(src.f(x + rho * theta)) * weight(rho) * std::pow(rho, dim - 1);
    };
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
      sum += quad::integrate_singular(f, breaks[i], breaks[i + 1], 1e-10);
    return sum;
  };
  if (dim == 1) return radial(make_vec({1.0})) + radial(make_vec({-1.0}));
  if (dim == 2) {
    double sum = 0.0;
    for (int k = 0; k < kAngularNodes2d; ++k) {
      // Offset keeps rays off the lattice directions where singular points usually sit.
      const double a = 2.0 * std::numbers::pi * (k + 0.5) / kAngularNodes2d;
      sum += radial(make_vec({std::cos(a), std::sin(a)}));
    }
    return sum * 2.0 * std::numbers::pi / kAngularNodes2d;
  }
  throw Error(Errc::InvalidArgument, "ball integrals of callables support N <= 2");
}

void check_beta(double beta, double s) {
  if (!(beta >= 0.0 && beta < 2.0 * s))
    throw Error(Errc::BadExponent, fmt::format("Morrey exponent beta = {} must lie in [0, 2s) = [0, {})", beta, 2 * s));
}

/// Trapezoid weight of node index i on [0, n-1].
double trap(int i, int n) { return (i == 0 || i == n - 1) ? 0.5 : 1.0; }

struct SubBox {
  std::array<int, kMaxDim> first{}, count{};
  std::size_t size = 1;
};

SubBox region_nodes(const Grid& g, const Region& region) {
  SubBox b;
  for (int a = 0; a < g.dim(); ++a) {
    const double lo = (region.lo(a) - g.lo()(a)) / g.h(), hi = (region.hi(a) - g.lo()(a)) / g.h();
    const int i0 = std::max(0, static_cast<int>(std::ceil(lo - 1e-9)));
    const int i1 = std::min(g.extent(a) - 1, static_cast<int>(std::floor(hi + 1e-9)));
    if (i1 - i0 < 1) throw Error(Errc::InvalidArgument, "region holds fewer than two grid nodes per axis");
    b.first[a] = i0;
    b.count[a] = i1 - i0 + 1;
    b.size *= static_cast<std::size_t>(b.count[a]);
  }
  return b;
}

/// max over windows of `len` consecutive entries of (max - min), sliding deques.
double window_oscillation(const std::vector<double>& v, int len) {
  if (len >= static_cast<int>(v.size())) {
    const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return *mx - *mn;
  }
  std::deque<int> qmax, qmin;
  double best = 0.0;
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    while (!qmax.empty() && v[qmax.back()] <= v[i]) qmax.pop_back();
    while (!qmin.empty() && v[qmin.back()] >= v[i]) qmin.pop_back();
    qmax.push_back(i);
    qmin.push_back(i);
    if (qmax.front() <= i - len) qmax.pop_front();
    if (qmin.front() <= i - len) qmin.pop_front();
    if (i >= len - 1) best = std::max(best, v[qmax.front()] - v[qmin.front()]);
  }
  return best;
}

/// Sliding window extreme of 1D data (window `len`), max if `take_max` else min.
std::vector<double> sliding_extreme(const std::vector<double>& v, int len, bool take_max) {
  std::vector<double> out;
  std::deque<int> q;
  auto better = [&](double a, double b) { return take_max ? a >= b : a <= b; };
  for (int i = 0; i < static_cast<int>(v.size()); ++i) {
    while (!q.empty() && better(v[i], v[q.back()])) q.pop_back();
    q.push_back(i);
    if (q.front() <= i - len) q.pop_front();
    if (i >= len - 1) out.push_back(v[q.front()]);
  }
  return out;
}

/// Oscillation over len x len node squares of a row-major nx x ny array.
double square_oscillation(const std::vector<double>& v, int nx, int ny, int len) {
  len = std::min({len, nx, ny});
  auto extreme = [&](bool take_max) {
    const int ox = nx - len + 1, oy = ny - len + 1;
    std::vector<double> rows(static_cast<std::size_t>(ox) * ny);
    for (int j = 0; j < ny; ++j) {
      std::vector<double> line(v.begin() + static_cast<std::ptrdiff_t>(j) * nx,
                               v.begin() + static_cast<std::ptrdiff_t>(j + 1) * nx);
      const auto e = sliding_extreme(line, len, take_max);
      std::copy(e.begin(), e.end(), rows.begin() + static_cast<std::ptrdiff_t>(j) * ox);
    }
    std::vector<double> out(static_cast<std::size_t>(ox) * oy);
    for (int i = 0; i < ox; ++i) {
      std::vector<double> col(ny);
      for (int j = 0; j < ny; ++j) col[j] = rows[static_cast<std::size_t>(j) * ox + i];
      const auto e = sliding_extreme(col, len, take_max);
      for (int j = 0; j < oy; ++j) out[static_cast<std::size_t>(j) * ox + i] = e[j];
    }
    return out;
  };
  const auto mx = extreme(true), mn = extreme(false);
  double best = 0.0;
  for (std::size_t k = 0; k < mx.size(); ++k) best = std::max(best, mx[k] - mn[k]);
  return best;
}

/// Oscillation at each scale of the region's values (1D or 2D).
std::vector<double> oscillations(const std::vector<double>& v, const SubBox& box, int dim,
                                 const std::vector<int>& windows) {
  std::vector<double> out;
  for (int m : windows) {
    if (dim == 1) out.push_back(window_oscillation(v, m + 1));
    else out.push_back(square_oscillation(v, box.count[0], box.count[1], m + 1));
  }
  return out;
}

}  // namespace

double Cutoff::operator()(const Vec& x) const {
  const double r = center.size() ? (x - center).norm() : x.norm();
  return quintic_bump(r / (2.0 * R));
}

ScalarFn Cutoff::as_function() const {
  return [c = *this](const Vec& x) { return c(x); };
}

double omega_s(double t, double s, int dim) {
  if (dim > 2.0 * s) return std::pow(t, 2.0 * s - dim);
  if (dim == 2.0 * s) return std::max(-std::log(t), 1.0);
  return 1.0;
}

bool Region::contains(const Vec& x) const {
  for (Eigen::Index a = 0; a < x.size(); ++a)
    if (x(a) < lo(a) || x(a) > hi(a)) return false;
  return true;
}

std::vector<double> dyadic_radii(double h, double top) {
  std::vector<double> r;
  for (double v = h; v < top * (1 - 1e-12); v *= 2.0) r.push_back(v);
  r.push_back(top);
  return r;
}

std::vector<Vec> sample_centers(const Region& region, double spacing, int random, std::uint64_t seed) {
  const int n = static_cast<int>(region.lo.size());
  std::vector<Vec> out;
  std::array<int, kMaxDim> count{};
  std::size_t total = 1;
  for (int a = 0; a < n; ++a) {
    count[a] = std::max(1, static_cast<int>(std::floor((region.hi(a) - region.lo(a)) / spacing + 1e-9)) + 1);
    total *= static_cast<std::size_t>(count[a]);
  }
  for (std::size_t f = 0; f < total; ++f) {
    Vec x(n);
    std::size_t rest = f;
    for (int a = 0; a < n; ++a) {
      x(a) = region.lo(a) + static_cast<double>(rest % count[a]) * spacing;
      rest /= count[a];
    }
    out.push_back(x);
  }
  std::mt19937_64 rng(seed);
  for (int k = 0; k < random; ++k) {
    Vec x(n);
    for (int a = 0; a < n; ++a) x(a) = std::uniform_real_distribution<double>(region.lo(a), region.hi(a))(rng);
    out.push_back(x);
  }
  return out;
}

double morrey_norm(const ScalarSource& f, int dim, double beta, double s, const std::vector<Vec>& centers,
                   const std::vector<double>& radii) {
  check_beta(beta, s);
  double best = 0.0;
  for (const Vec& x : centers)
    for (double r : radii)
      best = std::max(best, std::pow(r, beta - dim) * ball_integral(f, dim, x, r, [](double) { return 1.0; }));
  return best;
}

double morrey_norm(const DiscreteField& f, double beta, double s, const std::vector<Vec>& centers,
                   const std::vector<double>& radii) {
  check_beta(beta, s);
  const Grid& g = f.grid();
  const double cell = std::pow(g.h(), g.dim());
  double best = 0.0;
  for (const Vec& x : centers) {
    for (double r : radii) {
      double sum = 0.0;
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = (g.node(i) - x).norm();
        if (d < r - 1e-9 * g.h()) sum += std::abs(f[i]);
        else if (d <= r + 1e-9 * g.h()) sum += 0.5 * std::abs(f[i]);
      }
      best = std::max(best, std::pow(r, beta - g.dim()) * sum * cell);
    }
  }
  return best;
}

double kato_modulus(const ScalarSource& v, double r, double s, int dim, const std::vector<Vec>& centers) {
  double best = 0.0;
  for (const Vec& x : centers)
    best = std::max(best, ball_integral(v, dim, x, r, [&](double rho) { return omega_s(rho, s, dim); }));
  return best;
}

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, int min_points) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (x[i] > 0.0 && y[i] > 0.0 && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  const int n = static_cast<int>(lx.size());
  if (n < min_points)
    throw Error(Errc::FitIllConditioned, fmt::format("{} usable scales, need at least {}", n, min_points));
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) mx += lx[i], my += ly[i];
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) sxx += (lx[i] - mx) * (lx[i] - mx), sxy += (lx[i] - mx) * (ly[i] - my);
  if (sxx <= 0.0) throw Error(Errc::FitIllConditioned, "all scales coincide");
  LogLogFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  for (int i = 0; i < n; ++i) fit.residual = std::max(fit.residual, std::abs(ly[i] - fit.intercept - fit.slope * lx[i]));
  fit.points = n;
  const auto [lo, hi] = std::minmax_element(lx.begin(), lx.end());
  fit.decades = (*hi - *lo) / std::log(10.0);
  return fit;
}

LogLogFit eta_scaling_check(const ScalarSource& f, double s, int dim, const Vec& x0,
                            const std::vector<double>& radii, const std::vector<Vec>& centers) {
  if (radii.size() < 4) throw Error(Errc::FitIllConditioned, "eta scaling needs at least 4 radii");
  std::vector<double> eta;
  for (double r : radii) {
    ScalarSource scaled;
    scaled.f = [&f, r, s, x0](const Vec& x) { return std::pow(r, 2.0 * s) * f.f(r * x + x0); };
    for (const Vec& p : f.singularities) scaled.singularities.push_back((p - x0) / r);
    eta.push_back(kato_modulus(scaled, 1.0, s, dim, centers));
  }
  return fit_loglog(radii, eta);
}

double l1s_norm(const DiscreteField& u, double s) {
  const Grid& g = u.grid();
  const int n = g.dim();
  const FarField& far = u.far_field();
  if (far.growth() >= 2.0 * s)
    throw Error(Errc::DivergentTail, fmt::format("far-field growth {} is not below 2s = {}", far.growth(), 2 * s));
  auto weight = [&](const Vec& x) { return 1.0 / (1.0 + std::pow(x.norm(), n + 2.0 * s)); };

  double box = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto idx = g.multi(i);
    double w = 1.0;
    for (int a = 0; a < n; ++a) w *= trap(idx[a], g.extent(a)) * g.h();
    box += w * std::abs(u[i]) * weight(g.node(i));
  }
  if (far.kind == FarField::Kind::Zero) return box;

  const double inf = std::numeric_limits<double>::infinity();
  double tail = 0.0;
  const Vec lo = g.lo(), hi = g.hi();
  if (n == 1) {
    auto f = [&](double t) {
      const Vec x = make_vec({t});
      return std::abs(far(x)) * weight(x);
    };
    tail += quad::integrate([&](double t) { return f(-t); }, -lo(0), inf, 1e-10);
    tail += quad::integrate(f, hi(0), inf, 1e-10);
  } else if (n == 2) {
    if (!g.contains(Vec::Zero(2))) throw Error(Errc::InvalidArgument, "2D tail integral needs the origin in the box");
    constexpr int kRays = 512;
    for (int k = 0; k < kRays; ++k) {
      const double a = 2.0 * std::numbers::pi * (k + 0.5) / kRays;
      const Vec th = make_vec({std::cos(a), std::sin(a)});
      double exit = inf;
      for (int ax = 0; ax < 2; ++ax) {
        if (th(ax) > 0) exit = std::min(exit, hi(ax) / th(ax));
        if (th(ax) < 0) exit = std::min(exit, lo(ax) / th(ax));
      }
      auto f = [&](double rho) {
        const Vec x = rho * th;
        return std::abs(far(x)) * weight(x) * rho;
      };
      tail += quad::integrate(f, exit, inf, 1e-9) * 2.0 * std::numbers::pi / kRays;
    }
  } else {
    throw Error(Errc::InvalidArgument, "L1_s tails support N <= 2");
  }
  return box + tail;
}

double hs_seminorm(const DiscreteField& u, const Region& region, double s) {
  const Grid& g = u.grid();
  const int n = g.dim();
  const double h = g.h();
  const SubBox box = region_nodes(g, region);
  std::vector<double> val(box.size), w(box.size);
  std::vector<std::array<int, kMaxDim>> loc(box.size);
  for (std::size_t k = 0; k < box.size; ++k) {
    std::array<int, kMaxDim> local{}, global{};
    std::size_t rest = k;
    double wk = 1.0;
    for (int a = 0; a < n; ++a) {
      local[a] = static_cast<int>(rest % box.count[a]);
      rest /= box.count[a];
      global[a] = box.first[a] + local[a];
      wk *= trap(local[a], box.count[a]) * h;
    }
    loc[k] = local;
    val[k] = u[g.flat(global)];
    w[k] = wk;
  }

  // Pairs at lattice distance >= 2 (sup norm): tensor trapezoid.
  double far_sum = 0.0;
  const auto count = static_cast<long>(box.size);
#pragma omp parallel for reduction(+ : far_sum) schedule(dynamic, 16)
  for (long i = 0; i < count; ++i) {
    for (long j = i + 1; j < count; ++j) {
      int linf = 0;
      double dist2 = 0.0;
      for (int a = 0; a < n; ++a) {
        const int d = loc[j][a] - loc[i][a];
        linf = std::max(linf, std::abs(d));
        dist2 += static_cast<double>(d) * d;
      }
      if (linf < 2) continue;
      const double diff = val[i] - val[j];
      far_sum += 2.0 * w[i] * w[j] * diff * diff * std::pow(std::sqrt(dist2) * h, -n - 2.0 * s);
    }
  }

  // Near field: local slopes times the analytic integral of |t|^{2-N-2s} against the weight
  // missing from the far sum (1 on |t| <= h, 2 - |t|/h on [h, 2h], per axis).
  const double p = 2.0 - 2.0 * s;
  double near_const = 0.0;
  if (n == 1) {
    near_const = std::pow(h, p) * (1.0 / p + 2.0 * (std::pow(2.0, p) - 1.0) / p -
                                   (std::pow(2.0, p + 1.0) - 1.0) / (p + 1.0));
  } else if (n == 2) {
    auto wn = [](double t) { return t <= 1.0 ? 1.0 : 2.0 - t; };
    auto inner = [&](double t1) {
      return quad::integrate_panels(
          [&](double t2) { return wn(t2) * t1 * t1 * std::pow(t1 * t1 + t2 * t2, -1.0 - s); },
          std::vector<double>{0.0, 1.0, 2.0}, 1e-9, 10);
    };
    // Four quadrants of [-2, 2]^2.
    near_const = 4.0 * std::pow(h, p) *
                 quad::integrate_panels([&](double t1) { return wn(t1) * inner(t1); },
                                        std::vector<double>{0.0, 1.0, 2.0}, 1e-8, 10);
  } else {
    throw Error(Errc::InvalidArgument, "hs_seminorm supports N <= 2");
  }
  double near_sum = 0.0;
  for (std::size_t k = 0; k < box.size; ++k) {
    if (n == 1) {
      const int i = loc[k][0];
      double acc = 0.0;
      if (i > 0) acc += std::pow((val[k] - val[k - 1]) / h, 2);
      if (i + 1 < box.count[0]) acc += std::pow((val[k + 1] - val[k]) / h, 2);
      near_sum += w[k] * acc * near_const;
    } else {
      double grad2 = 0.0;
      std::size_t stride = 1;
      for (int a = 0; a < 2; ++a) {
        const int i = loc[k][a];
        double acc = 0.0;
        if (i > 0) acc += std::pow((val[k] - val[k - stride]) / h, 2);
        if (i + 1 < box.count[a]) acc += std::pow((val[k + stride] - val[k]) / h, 2);
        // Each side covers a half of the near disc in this axis direction.
        grad2 += 0.5 * acc;
        stride *= static_cast<std::size_t>(box.count[a]);
      }
      near_sum += w[k] * grad2 * near_const;
    }
  }
  return std::sqrt(far_sum + near_sum);
}

std::string HolderFit::label() const {
  if (lipschitz_or_better) return "≥1, C^{0,1} or better";
  if (exponent > 1.0) return fmt::format("{:.3f} (C^{{1,{:.3f}}})", exponent, exponent - 1.0);
  return fmt::format("{:.3f}", exponent);
}

HolderFit fit_holder(const DiscreteField& u, const Region& region, const std::vector<double>& scales) {
  const Grid& g = u.grid();
  const int n = g.dim();
  if (n > 2) throw Error(Errc::InvalidArgument, "fit_holder supports N <= 2");
  if (scales.size() < 4) throw Error(Errc::FitIllConditioned, "Hoelder fit needs at least 4 scales");
  const double diam = (region.hi - region.lo).norm();
  std::vector<int> windows;
  for (double rho : scales) {
    if (rho < 4.0 * g.h() * (1 - 1e-9) || rho > diam / 4.0 * (1 + 1e-9))
      throw Error(Errc::InvalidArgument, fmt::format("scale {} outside [4h, diam/4] = [{}, {}]", rho, 4 * g.h(), diam / 4));
    windows.push_back(static_cast<int>(std::llround(rho / g.h())));
  }

  const SubBox box = region_nodes(g, region);
  std::vector<double> v(box.size);
  for (std::size_t k = 0; k < box.size; ++k) {
    std::array<int, kMaxDim> global{};
    std::size_t rest = k;
    for (int a = 0; a < n; ++a) {
      global[a] = box.first[a] + static_cast<int>(rest % box.count[a]);
      rest /= box.count[a];
    }
    v[k] = u[g.flat(global)];
  }

  HolderFit fit;
  fit.scales = scales;
  fit.oscillation = oscillations(v, box, n, windows);
  const double vmax = std::max(1.0, *std::max_element(fit.oscillation.begin(), fit.oscillation.end()));
  if (*std::max_element(fit.oscillation.begin(), fit.oscillation.end()) <= 1e-13 * vmax) {
    fit.exponent = 1.0;
    fit.lipschitz_or_better = true;
    return fit;
  }
  const LogLogFit base = fit_loglog(scales, fit.oscillation);
  fit.exponent = base.slope;
  fit.residual = base.residual;
  fit.seminorm = fit.oscillation.front() / std::pow(scales.front(), base.slope);
  // Near-linear oscillation: C^1 data with curvature also fits slightly below 1, so let the first
  // differences decide.
  if (fit.exponent < 0.9) return fit;

  // First differences along each axis; their oscillation decides C^{1, alpha - 1}.
  double worst_osc = 0.0, scale_du = 0.0;
  std::vector<double> du_osc(scales.size(), 0.0);
  std::size_t stride = 1;
  for (int a = 0; a < n; ++a) {
    std::vector<double> du(box.size, 0.0);
    for (std::size_t k = 0; k < box.size; ++k) {
      const int i = static_cast<int>((k / stride) % box.count[a]);
      const std::size_t kk = i + 1 < box.count[a] ? k : k - stride;
      du[k] = (v[kk + stride] - v[kk]) / g.h();
      scale_du = std::max(scale_du, std::abs(du[k]));
    }
    const auto o = oscillations(du, box, n, windows);
    for (std::size_t j = 0; j < o.size(); ++j) du_osc[j] = std::max(du_osc[j], o[j]);
    stride *= static_cast<std::size_t>(box.count[a]);
  }
  worst_osc = *std::max_element(du_osc.begin(), du_osc.end());
  if (worst_osc <= 1e-8 * std::max(1.0, scale_du)) {
    fit.lipschitz_or_better = true;
    return fit;
  }
  try {
    // Decaying first-difference oscillation means C^{1, alpha}; a flat one means u is not C^1.
    const LogLogFit second = fit_loglog(scales, du_osc);
    if (second.slope > 0.05) {
      fit.exponent = 1.0 + std::min(second.slope, 1.0);
      fit.residual = std::max(fit.residual, second.residual);
    }
  } catch (const Error&) {
  }
  return fit;
}

ScalarClassTag classify(const ScalarSource& f, int dim, double beta, double s, const std::vector<Vec>& centers,
                        const std::vector<double>& radii) {
  ScalarClassTag tag;
  tag.beta = beta;
  tag.s = s;
  tag.morrey = morrey_norm(f, dim, beta, s, centers, radii);
  tag.radii = radii;
  for (double r : radii) tag.eta.push_back(kato_modulus(f, r, s, dim, centers));
  for (std::size_t i = 1; i < tag.eta.size(); ++i)
    if (tag.eta[i] < tag.eta[i - 1] * (1 - 1e-9)) tag.eta_monotone = false;
  return tag;
}

}  // namespace nlreg
