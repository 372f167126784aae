// Cutoffs and the norms and moduli used by the regularity diagnostics: Morrey, Kato, L^1_s,
// the discrete H^s seminorm and Hoelder exponent fits.
#pragma once

#include "nlreg/core.hpp"
#include "nlreg/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nlreg {

/// phi_R(x) = phi_1(x / R) with phi_1 = 1 on B_1, 0 outside B_2 (quintic profile).
struct Cutoff {
  double R = 1.0;
  Vec center;

  double operator()(const Vec& x) const;
  ScalarFn as_function() const;
};

/// The shape of the Riesz kernel: t^{2s-N}, max(-log t, 1) or 1.
double omega_s(double t, double s, int dim);

/// Integrand description for callables: points where f is singular (used as quadrature breaks).
struct ScalarSource {
  ScalarFn f;
  std::vector<Vec> singularities;
};

/// Axis-aligned region [lo, hi].
struct Region {
  Vec lo, hi;
  bool contains(const Vec& x) const;
};

/// Dyadic radii h, 2h, ... up to 1 (1 included).
std::vector<double> dyadic_radii(double h, double top = 1.0);

/// Grid nodes inside `region` thinned to at most `max_nodes`, plus `random` seeded centers.
std::vector<Vec> sample_centers(const Region& region, double spacing, int random = 64,
                                std::uint64_t seed = 0x5EED);

/// sup over centers and radii of r^{beta - N} int_{B_r(x)} |f|. BadExponent unless 0 <= beta < 2s.
double morrey_norm(const ScalarSource& f, int dim, double beta, double s, const std::vector<Vec>& centers,
                   const std::vector<double>& radii);
double morrey_norm(const DiscreteField& f, double beta, double s, const std::vector<Vec>& centers,
                   const std::vector<double>& radii);

/// eta_V(r) = sup_x int_{B_r(x)} |V(y)| omega_s(|x - y|) dy over the given centers.
double kato_modulus(const ScalarSource& v, double r, double s, int dim, const std::vector<Vec>& centers);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  ///< max |log y - fit|
  int points = 0;
  double decades = 0.0;
};
/// Ordinary least squares of log y against log x. FitIllConditioned for < 4 usable points.
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y, int min_points = 4);

/// Slope of log eta_{f_{r,x0}}(1) against log r with f_{r,x0}(x) = r^{2s} f(r x + x0).
LogLogFit eta_scaling_check(const ScalarSource& f, double s, int dim, const Vec& x0,
                            const std::vector<double>& radii, const std::vector<Vec>& centers);

/// int |u| / (1 + |x|^{N+2s}): grid quadrature plus the far-field tail. DivergentTail if growth >= 2s.
double l1s_norm(const DiscreteField& u, double s);

/// (int int_{region^2} |u(x) - u(y)|^2 |x - y|^{-N-2s})^{1/2}.
double hs_seminorm(const DiscreteField& u, const Region& region, double s);

struct HolderFit {
  double exponent = 0.0;
  double seminorm = 0.0;
  double residual = 0.0;
  bool lipschitz_or_better = false;  ///< first differences have no oscillation
  std::vector<double> scales, oscillation;
  std::string label() const;
};
/// Oscillation osc(rho) = max |u(x) - u(y)| over |x - y|_inf <= rho inside `region`, fitted over
/// `scales`; exponents >= 0.99 are refined on first differences.
HolderFit fit_holder(const DiscreteField& u, const Region& region, const std::vector<double>& scales);

/// Morrey/Kato class record for a potential or right-hand side.
struct ScalarClassTag {
  double beta = 0.0;
  double s = 0.5;
  double morrey = 0.0;
  std::vector<double> radii, eta;
  bool eta_monotone = true;
  bool valid() const { return beta >= 0.0 && beta < 2.0 * s && eta_monotone; }
};
ScalarClassTag classify(const ScalarSource& f, int dim, double beta, double s, const std::vector<Vec>& centers,
                        const std::vector<double>& radii);

}  // namespace nlreg
