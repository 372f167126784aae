// Thin wrappers over Boost quadrature plus a runtime Gauss-Legendre table.
#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace nlreg::quad {

struct Rule {
  std::vector<double> nodes;    // on [-1, 1]
  std::vector<double> weights;
};

/// Gauss-Legendre rule with n points (cached, thread-safe after first use).
const Rule& gauss_legendre(int n);

/// Adaptive Gauss-Kronrod on [a, b]; b = +infinity switches to an exp-sinh rule.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_depth = 12,
                 double* error = nullptr) {
  if (a == b) return 0.0;
  double err = 0.0;
  if (b == std::numeric_limits<double>::infinity()) {
    // Algebraic tails (r^{-1-s} with small s) defeat the mapped Gauss-Kronrod rule.
    static thread_local boost::math::quadrature::exp_sinh<double> tail(max_depth > 9 ? max_depth : 9);
    double l1 = 0.0;
    const double v = tail.integrate([&](double t) { return f(a + t); }, rel_tol, &err, &l1);
    if (error) *error = err;
    return v;
  }
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      f, a, b, max_depth, rel_tol, &err);
  if (error) *error = err;
  return v;
}

/// Double-exponential rule on a finite [a, b]; tolerates integrable endpoint singularities.
template <class F>
double integrate_singular(F&& f, double a, double b, double rel_tol = 1e-10) {
  if (a == b) return 0.0;
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(f, a, b, rel_tol);
}

/// Sum of adaptive integrals over consecutive panels [breaks[i], breaks[i+1]].
template <class F>
double integrate_panels(F&& f, std::span<const double> breaks, double rel_tol = 1e-10,
                        unsigned max_depth = 10) {
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i)
    total += integrate(f, breaks[i], breaks[i + 1], rel_tol, max_depth);
  return total;
}

/// Fixed Gauss-Legendre on [a, b].
template <class F>
double fixed_gauss(F&& f, double a, double b, int n) {
  const Rule& rule = gauss_legendre(n);
  const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t k = 0; k < rule.nodes.size(); ++k) sum += rule.weights[k] * f(mid + half * rule.nodes[k]);
  return sum * half;
}

/// Panel breakpoints from a to b: geometric doubling starting at `first` width, capped at `max_width`.
std::vector<double> graded_breaks(double a, double b, double first, double max_width);

}  // namespace nlreg::quad
