#include "nlreg/geometry.hpp"

#include "nlreg/quadrature.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace nlreg {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Vec tangent_part(const Vec& x) { return x.head(x.size() - 1); }

}  // namespace

BoundaryGraph BoundaryGraph::flat(int tangent_dim) {
  return BoundaryGraph{
      "flat",
      [](const Vec&) { return 0.0; },
      [tangent_dim](const Vec&) -> Vec { return Vec::Zero(tangent_dim); },
      [tangent_dim](const Vec&) -> Mat { return Mat::Zero(tangent_dim, tangent_dim); },
  };
}

BoundaryGraph BoundaryGraph::parabola(int tangent_dim, double curvature) {
  return BoundaryGraph{
      fmt::format("parabola(c={})", curvature),
      [curvature](const Vec& t) { return 0.5 * curvature * t.squaredNorm(); },
      [curvature](const Vec& t) -> Vec { return curvature * t; },
      [curvature, tangent_dim](const Vec&) -> Mat {
        return curvature * Mat::Identity(tangent_dim, tangent_dim);
      },
  };
}

Domain::Domain(Shape shape, int dim, std::optional<double> regularity_radius)
    : shape_(std::move(shape)), dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw Error(Errc::InvalidArgument, "dimension must be 1..3");
  if (std::holds_alternative<Interval>(shape_) && dim != 1)
    throw Error(Errc::InvalidArgument, "Interval domains are one-dimensional");
  if (std::holds_alternative<Graph>(shape_) && dim < 2)
    throw Error(Errc::InvalidArgument, "Graph domains need N >= 2");
  if (const auto* iv = std::get_if<Interval>(&shape_); iv && !(iv->a < iv->b))
    throw Error(Errc::InvalidArgument, "Interval needs a < b");
  if (const auto* b = std::get_if<Ball>(&shape_); b && !(b->radius > 0.0))
    throw Error(Errc::InvalidArgument, "Ball radius must be positive");
  const double diam = diameter();
  r0_ = regularity_radius.value_or(std::isfinite(diam) ? 0.25 * diam : 0.25);
}

Domain Domain::half_space(int dim, int axis) {
  if (axis < 0) axis = dim - 1;
  return Domain(HalfSpace{unit_vec(dim, axis)}, dim);
}
Domain Domain::ball(const Vec& center, double radius) {
  return Domain(Ball{center, radius}, static_cast<int>(center.size()));
}
Domain Domain::interval(double a, double b) { return Domain(Interval{a, b}, 1); }
Domain Domain::box(const Vec& lo, const Vec& hi) {
  return Domain(Box{lo, hi}, static_cast<int>(lo.size()));
}
Domain Domain::graph(BoundaryGraph phi, double gamma, int dim) {
  return Domain(Graph{std::move(phi), gamma}, dim);
}

const Graph& Domain::as_graph() const {
  if (const auto* g = std::get_if<Graph>(&shape_)) return *g;
  throw Error(Errc::InvalidArgument, "domain is not a graph domain");
}

double Domain::dist(const Vec& x) const {
  return std::visit(
      Overloaded{
          [&](const HalfSpace& hs) { return std::max(hs.normal.dot(x), 0.0); },
          [&](const Ball& b) { return std::max(b.radius - (x - b.center).norm(), 0.0); },
          [&](const Interval& iv) { return std::max(std::min(x(0) - iv.a, iv.b - x(0)), 0.0); },
          [&](const Box& bx) {
            double d = kInf;
            for (int i = 0; i < dim_; ++i) d = std::min({d, x(i) - bx.lo(i), bx.hi(i) - x(i)});
            return std::max(d, 0.0);
          },
          [&](const Graph& g) { return graph_dist(g, x); },
      },
      shape_);
}

// Nearest boundary point by candidate sampling followed by Newton on the squared distance.
double Domain::graph_dist(const Graph& g, const Vec& x) const {
  const Vec xt = tangent_part(x);
  const double xn = x(dim_ - 1);
  const double vertical = xn - g.phi.value(xt);
  if (vertical <= 0.0) return 0.0;
  const int m = dim_ - 1;

  auto objective = [&](const Vec& t) {
    const double dn = g.phi.value(t) - xn;
    return (t - xt).squaredNorm() + dn * dn;
  };

  Vec best = xt;
  double best_val = vertical * vertical;
  const int samples = m == 1 ? 64 : 16;
  for (int i = 0; i <= samples; ++i) {
    if (m == 1) {
      Vec t = xt;
      t(0) += vertical * (2.0 * i / samples - 1.0);
      const double v = objective(t);
      if (v < best_val) best_val = v, best = t;
    } else {
      for (int j = 0; j <= samples; ++j) {
        Vec t = xt;
        t(0) += vertical * (2.0 * i / samples - 1.0);
        t(1) += vertical * (2.0 * j / samples - 1.0);
        const double v = objective(t);
        if (v < best_val) best_val = v, best = t;
      }
    }
  }

  Vec t = best;
  for (int iter = 0; iter < 60; ++iter) {
    const double dn = g.phi.value(t) - xn;
    const Vec grad_phi = g.phi.gradient(t);
    const Vec grad = 2.0 * (t - xt) + 2.0 * dn * grad_phi;
    Mat hess = 2.0 * Mat::Identity(m, m) + 2.0 * grad_phi * grad_phi.transpose() +
               2.0 * dn * g.phi.hessian(t);
    Vec step;
    Eigen::LLT<Mat> llt(hess);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(grad);
    } else {
      step = 0.25 * grad;
    }
    // Backtrack so the objective never increases.
    double lambda = 1.0;
    const double current = objective(t);
    Vec trial = t - step;
    while (objective(trial) > current && lambda > 1e-8) {
      lambda *= 0.5;
      trial = t - lambda * step;
    }
    const double moved = (trial - t).norm();
    t = trial;
    if (moved <= 1e-15 * (1.0 + t.norm())) break;
  }
  return std::sqrt(std::min(objective(t), best_val));
}

bool Domain::on_boundary(const Vec& z, double tol) const {
  return std::visit(
      Overloaded{
          [&](const HalfSpace& hs) { return std::abs(hs.normal.dot(z)) <= tol; },
          [&](const Ball& b) { return std::abs((z - b.center).norm() - b.radius) <= tol; },
          [&](const Interval& iv) { return std::min(std::abs(z(0) - iv.a), std::abs(z(0) - iv.b)) <= tol; },
          [&](const Box& bx) {
            double face = kInf;
            for (int i = 0; i < dim_; ++i) {
              if (z(i) < bx.lo(i) - tol || z(i) > bx.hi(i) + tol) return false;
              face = std::min({face, std::abs(z(i) - bx.lo(i)), std::abs(z(i) - bx.hi(i))});
            }
            return face <= tol;
          },
          [&](const Graph& g) {
            return std::abs(z(dim_ - 1) - g.phi.value(tangent_part(z))) <= tol;
          },
      },
      shape_);
}

double Domain::diameter() const {
  return std::visit(Overloaded{
                        [](const HalfSpace&) { return kInf; },
                        [](const Ball& b) { return 2.0 * b.radius; },
                        [](const Interval& iv) { return iv.b - iv.a; },
                        [](const Box& bx) { return (bx.hi - bx.lo).norm(); },
                        [](const Graph&) { return kInf; },
                    },
                    shape_);
}

std::vector<double> Domain::line_crossings(const Vec& base, int axis, double lo, double hi) const {
  std::vector<double> out;
  auto keep = [&](double t) {
    if (t > lo && t < hi) out.push_back(t);
  };
  std::visit(Overloaded{
                 [&](const HalfSpace& hs) {
                   if (std::abs(hs.normal(axis)) > 1e-300) {
                     Vec p = base;
                     p(axis) = 0.0;
                     keep(-hs.normal.dot(p) / hs.normal(axis));
                   }
                 },
                 [&](const Ball& b) {
                   Vec p = base - b.center;
                   const double pa = p(axis);
                   p(axis) = 0.0;
                   const double rem = b.radius * b.radius - p.squaredNorm();
                   if (rem > 0.0) {
                     keep(b.center(axis) - std::sqrt(rem));
                     keep(b.center(axis) + std::sqrt(rem));
                   }
                   (void)pa;
                 },
                 [&](const Interval& iv) {
                   keep(iv.a);
                   keep(iv.b);
                 },
                 [&](const Box& bx) {
                   for (int i = 0; i < dim_; ++i)
                     if (i != axis && (base(i) < bx.lo(i) || base(i) > bx.hi(i))) return;
                   keep(bx.lo(axis));
                   keep(bx.hi(axis));
                 },
                 [&](const Graph& g) {
                   if (axis == dim_ - 1) {
                     keep(g.phi.value(tangent_part(base)));
                   } else {
                     // Crossing along a tangential axis: bracket sign changes of x_N - phi on a fine scan.
                     const int scan = 256;
                     auto height = [&](double t) {
                       Vec p = base;
                       p(axis) = t;
                       return p(dim_ - 1) - g.phi.value(tangent_part(p));
                     };
                     double prev_t = lo, prev = height(lo);
                     for (int k = 1; k <= scan; ++k) {
                       const double t = lo + (hi - lo) * k / scan;
                       const double v = height(t);
                       if ((prev > 0) != (v > 0)) {
                         double a = prev_t, b = t, fa = prev;
                         for (int it = 0; it < 80; ++it) {
                           const double mid = 0.5 * (a + b);
                           const double fm = height(mid);
                           if ((fa > 0) == (fm > 0)) a = mid, fa = fm; else b = mid;
                         }
                         keep(0.5 * (a + b));
                       }
                       prev_t = t;
                       prev = v;
                     }
                   }
                 },
             },
             shape_);
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Vec> Domain::boundary_points_1d() const {
  if (dim_ != 1) return {};
  return std::visit(Overloaded{
                        [](const HalfSpace&) { return std::vector<Vec>{make_vec({0.0})}; },
                        [](const Ball& b) {
                          return std::vector<Vec>{make_vec({b.center(0) - b.radius}),
                                                  make_vec({b.center(0) + b.radius})};
                        },
                        [](const Interval& iv) {
                          return std::vector<Vec>{make_vec({iv.a}), make_vec({iv.b})};
                        },
                        [](const Box& bx) {
                          return std::vector<Vec>{make_vec({bx.lo(0)}), make_vec({bx.hi(0)})};
                        },
                        [](const Graph&) { return std::vector<Vec>{}; },
                    },
                    shape_);
}

std::string Domain::describe() const {
  return std::visit(Overloaded{
                        [&](const HalfSpace&) { return fmt::format("half_space(N={})", dim_); },
                        [&](const Ball& b) { return fmt::format("ball(N={}, R={})", dim_, b.radius); },
                        [](const Interval& iv) { return fmt::format("interval({}, {})", iv.a, iv.b); },
                        [&](const Box&) { return fmt::format("box(N={})", dim_); },
                        [&](const Graph& g) { return fmt::format("graph({}, N={})", g.phi.name, dim_); },
                    },
                    shape_);
}

double tubular_integral(const Domain& domain, const Vec& z, double r, double delta, double rel_tol) {
  if (!(r > 0.0)) throw Error(Errc::InvalidArgument, "tubular_integral needs r > 0");
  if (!domain.on_boundary(z, 1e-8)) throw Error(Errc::InvalidArgument, "z is not on the boundary");
  const int n = domain.dim();
  auto weight = [&](const Vec& y) {
    const double d = domain.dist(y);
    return d > 0.0 ? std::pow(d, delta) : 0.0;
  };

  // Integrates along one axis over [lo, hi], splitting where the line meets the boundary.
  auto line_integral = [&](const Vec& base, int axis, double lo, double hi) {
    std::vector<double> breaks{lo};
    for (double t : domain.line_crossings(base, axis, lo, hi)) breaks.push_back(t);
    if (z(axis) > lo && z(axis) < hi) breaks.push_back(z(axis));
    breaks.push_back(hi);
    std::sort(breaks.begin(), breaks.end());
    auto f = [&](double t) {
      Vec y = base;
      y(axis) = t;
      return weight(y);
    };
    return quad::integrate_panels(f, breaks, rel_tol, 12);
  };

  if (n == 1) return line_integral(z, 0, z(0) - r, z(0) + r);
  if (n == 2) {
    auto outer = [&](double y0) {
      const double c = std::sqrt(std::max(r * r - (y0 - z(0)) * (y0 - z(0)), 0.0));
      if (c <= 0.0) return 0.0;
      Vec base = z;
      base(0) = y0;
      return line_integral(base, 1, z(1) - c, z(1) + c);
    };
    std::vector<double> breaks{z(0) - r, z(0), z(0) + r};
    return quad::integrate_panels(outer, breaks, rel_tol, 10);
  }
  throw Error(Errc::InvalidArgument, "tubular_integral supports N <= 2");
}

TubularConstants tubular_constants(const Domain& domain, const Vec& z, double delta,
                                   const std::vector<double>& radii) {
  TubularConstants c{kInf, 0.0};
  for (double r : radii) {
    const double ratio = tubular_integral(domain, z, r, delta) / std::pow(r, domain.dim() + delta);
    c.lower = std::min(c.lower, ratio);
    c.upper = std::max(c.upper, ratio);
  }
  return c;
}

double quintic_bump(double t) {
  t = std::abs(t);
  if (t <= 0.5) return 1.0;
  if (t >= 1.0) return 0.0;
  const double u = 2.0 * t - 1.0;
  return 1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
}

double quintic_bump_derivative(double t) {
  const double a = std::abs(t);
  if (a <= 0.5 || a >= 1.0) return 0.0;
  const double u = 2.0 * a - 1.0;
  const double d = -60.0 * u * u * (1.0 - u) * (1.0 - u);
  return t < 0 ? -d : d;
}

AffineMap AffineMap::scaling(int dim, double factor) {
  return AffineMap(factor * Mat::Identity(dim, dim), Vec::Zero(dim));
}

FlatteningMap::FlatteningMap(BoundaryGraph phi, double rho, int dim)
    : phi_(std::move(phi)), rho_(rho), dim_(dim) {
  if (!(rho > 0.0)) throw Error(Errc::InvalidArgument, "flattening scale must be positive");
  if (dim < 2) throw Error(Errc::InvalidArgument, "flattening needs N >= 2");
}

double FlatteningMap::cutoff(const Vec& tangent) const { return quintic_bump(tangent.norm() / rho_); }

Vec FlatteningMap::shear_gradient(const Vec& t) const {
  const double norm = t.norm();
  const double eta = quintic_bump(norm / rho_);
  Vec g = eta * phi_.gradient(t);
  if (norm > 0.0) g += phi_.value(t) * quintic_bump_derivative(norm / rho_) / rho_ * (t / norm);
  return g;
}

Vec FlatteningMap::map(const Vec& x) const {
  const Vec t = tangent_part(x);
  Vec y = x;
  y(dim_ - 1) += cutoff(t) * phi_.value(t);
  return y;
}

Mat FlatteningMap::jacobian(const Vec& x) const {
  Mat j = Mat::Identity(dim_, dim_);
  const Vec g = shear_gradient(tangent_part(x));
  for (int k = 0; k < dim_ - 1; ++k) j(dim_ - 1, k) = g(k);
  return j;
}

double FlatteningMap::jacobian_deviation(int samples_per_axis) const {
  const int m = dim_ - 1;
  double sup = 0.0;
  if (m == 1) {
    for (int i = 0; i <= samples_per_axis; ++i) {
      Vec t(1);
      t(0) = rho_ * (2.0 * i / samples_per_axis - 1.0);
      sup = std::max(sup, shear_gradient(t).norm());
    }
  } else {
    const int k = std::max(16, static_cast<int>(std::sqrt(static_cast<double>(samples_per_axis)) * 4));
    for (int i = 0; i <= k; ++i)
      for (int j = 0; j <= k; ++j) {
        Vec t = Vec::Zero(m);
        t(0) = rho_ * (2.0 * i / k - 1.0);
        t(1) = rho_ * (2.0 * j / k - 1.0);
        sup = std::max(sup, shear_gradient(t).norm());
      }
  }
  return sup;
}

FlatteningMap build_flattening(const Domain& domain, double rho, bool enforce_bound) {
  const Graph& g = domain.as_graph();
  FlatteningMap map(g.phi, rho, domain.dim());
  if (enforce_bound) {
    const double dev = map.jacobian_deviation();
    if (dev >= 0.25)
      throw Error(Errc::ScaleTooLarge,
                  fmt::format("sup |D Phi - id| = {:.4f} >= 1/4 at rho = {}", dev, rho));
  }
  return map;
}

}  // namespace nlreg
