// Empirical regularity probes: growth exponents, d^s projections, affine projections, the u/d^s
// quotient, coercivity constants and distance to the Liouville families.
#pragma once

#include "nlreg/core.hpp"
#include "nlreg/funcspace.hpp"
#include "nlreg/geometry.hpp"
#include "nlreg/grid.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nlreg {

enum class Verdict { Pass, Fail, Inconclusive };
const char* verdict_name(Verdict v);

/// Quadrature nodes of B_r(z) intersected with the grid box (exact for piecewise quadratics in 1D).
struct BallQuadrature {
  std::vector<Vec> points;
  std::vector<double> weights;
  std::vector<double> u;  ///< interpolated field values at the points
};
BallQuadrature ball_quadrature(const DiscreteField& u, const Vec& z, double r);

/// u ~ t + T . (x - z) in L^2(B_r(z)). T is forced to zero for s <= 1/2.
struct AffineProjection {
  Vec z;
  double r = 0.0;
  double t = 0.0;
  Vec T;
  double residual_mass = 0.0;   ///< int (u - P u)^2
  double orthogonality = 0.0;   ///< max |int (u - P u) p| / (|u| |p|) over p in {1, x_i - z_i}
};
AffineProjection project_affine(const DiscreteField& u, const Vec& z, double r, double s);

struct GrowthProbe {
  std::vector<Vec> centers;
  std::vector<double> radii;
  std::vector<std::vector<double>> mass;  ///< [center][radius] squared L^2 masses
  std::vector<double> sup_curve;
  LogLogFit fit;
  double alpha = 0.0;
  double predicted = 0.0;
  bool at_cap = false;
  bool all_zero = false;
  Verdict verdict = Verdict::Inconclusive;
  std::string note;
  std::string alpha_label() const;
};
/// Exponents above this are reported as ">= cap".
inline constexpr double kGrowthCap = 2.0;

/// sup_z ||u - (mean or affine projection)||^2_{L^2(B_r(z))} ~ r^{N + 2 alpha}.
GrowthProbe interior_growth(const DiscreteField& u, const Domain& domain, const std::vector<Vec>& centers,
                            const std::vector<double>& radii, double predicted, bool affine = false,
                            double s = 0.5);
/// sup_z ||u||^2_{L^2(B_r(z))} ~ r^{N + 2 alpha} for boundary points z.
GrowthProbe boundary_growth(const DiscreteField& u, const Domain& domain, const std::vector<Vec>& points,
                            const std::vector<double>& radii, double predicted);

/// d^s_2 = phi_2 d^s with phi_2 = 1 on B_2, 0 outside B_4.
double ds2(const Domain& domain, const Vec& x, double s);

struct BoundaryProjection {
  Vec z;
  double r = 0.0;
  double Q = 0.0;
  double orthogonality = 0.0;  ///< |int (u - Q d^s_2) d^s_2| / (|u| |d^s_2|)
};
BoundaryProjection project_ds(const DiscreteField& u, const Domain& domain, const Vec& z, double r, double s);

struct QCurve {
  std::vector<double> radii, Q;
  LogLogFit cauchy;       ///< decay of |Q(r_k) - Q(r_{k+1})| against r_k
  bool cauchy_fitted = false;
};
QCurve q_curve(const DiscreteField& u, const Domain& domain, const Vec& z, const std::vector<double>& radii,
               double s);

struct QuotientReport {
  std::vector<Vec> boundary_points;
  std::vector<double> psi;
  std::vector<HolderFit> holder;  ///< per boundary strip
  double exponent = 0.0;          ///< min over strips
  bool lipschitz_or_better = false;
  std::string label() const;
};
/// psi(z) = 2 Q_z(4h) - Q_z(8h) and the Hoelder fit of u/d^s on the strip {d <= width}, with the
/// collar {d < 2h} replaced by its nearest valid value. StripTooThin if width < 8h. N = 1 only.
QuotientReport quotient_regularity(const DiscreteField& u, const Domain& domain, double strip_width, double s,
                                   const std::vector<double>& scales);

struct CoercivityPoint {
  double delta = 0.0, eta = 0.0;
  double c = 0.0, c_delta = 0.0;
  double c_doubled = 0.0, c_delta_doubled = 0.0;
  bool stable = false;
};
struct CoercivityReport {
  std::vector<CoercivityPoint> points;
  bool trivial = false;  ///< V = 0 on every test function
  Verdict verdict = Verdict::Inconclusive;
};
/// Minimal (c, c_delta) with int |V| u^2 <= eta_V(delta)(c [u]^2_{H^s} + c_delta |u|^2) on seeded
/// random bump fields (N = 1).
CoercivityReport coercivity_check(const ScalarSource& V, double s, const std::vector<double>& deltas,
                                  int tests = 20, std::uint64_t seed = 0x5EED);

enum class LiouvilleTarget { Affine, HalfSpaceProfile };
/// Relative L^2 distance to the best affine function or c max(x_N, 0)^s on `region`.
double liouville_distance(const DiscreteField& u, LiouvilleTarget target, double s, const Region& region);

}  // namespace nlreg
