// Domains, distance to the complement, tubular integrals and the boundary-flattening shear.
#pragma once

#include "nlreg/core.hpp"

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace nlreg {

/// Boundary graph t -> phi(t) on R^{N-1} with first and second derivatives.
struct BoundaryGraph {
  std::string name;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Mat(const Vec&)> hessian;

  static BoundaryGraph flat(int tangent_dim);
  /// phi(t) = c |t|^2 / 2.
  static BoundaryGraph parabola(int tangent_dim, double curvature = 1.0);
};

struct HalfSpace {
  Vec normal;  // unit interior normal; the domain is {x : normal . x > 0}
};
struct Ball {
  Vec center;
  double radius = 1.0;
};
struct Interval {
  double a = -1.0, b = 1.0;
};
struct Box {
  Vec lo, hi;
};
/// {x : x_N > phi(x')} with phi of class C^{1,gamma}.
struct Graph {
  BoundaryGraph phi;
  double gamma = 1.0;
};

class Domain {
 public:
  using Shape = std::variant<HalfSpace, Ball, Interval, Box, Graph>;

  Domain(Shape shape, int dim, std::optional<double> regularity_radius = std::nullopt);

  static Domain half_space(int dim, int axis = -1);
  static Domain ball(const Vec& center, double radius);
  static Domain interval(double a, double b);
  static Domain box(const Vec& lo, const Vec& hi);
  static Domain graph(BoundaryGraph phi, double gamma, int dim);

  int dim() const { return dim_; }
  const Shape& shape() const { return shape_; }
  bool is_graph() const { return std::holds_alternative<Graph>(shape_); }
  const Graph& as_graph() const;

  /// dist(x, complement); zero outside the domain.
  double dist(const Vec& x) const;
  bool contains(const Vec& x) const { return dist(x) > 0.0; }
  bool on_boundary(const Vec& z, double tol = 1e-8) const;
  /// Diameter (infinity for unbounded shapes).
  double diameter() const;
  /// Declared regularity radius r0.
  double regularity_radius() const { return r0_; }

  /// Parameters t in (lo, hi) where the line base + t e_axis crosses the boundary.
  std::vector<double> line_crossings(const Vec& base, int axis, double lo, double hi) const;

  /// Boundary points of a one-dimensional domain (empty for N > 1).
  std::vector<Vec> boundary_points_1d() const;

  std::string describe() const;

 private:
  double graph_dist(const Graph& g, const Vec& x) const;

  Shape shape_;
  int dim_;
  double r0_;
};

/// Integral of d^delta over B_r(z), z on the boundary.
double tubular_integral(const Domain& domain, const Vec& z, double r, double delta,
                        double rel_tol = 1e-9);

/// Min and max of tubular_integral / r^{N+delta} over the given radii.
struct TubularConstants {
  double lower = 0.0, upper = 0.0;
};
TubularConstants tubular_constants(const Domain& domain, const Vec& z, double delta,
                                   const std::vector<double>& radii);

/// C^2 quintic cutoff profile: 1 on [0, 1/2], 0 on [1, inf).
double quintic_bump(double t);
double quintic_bump_derivative(double t);

/// A C^1 map R^N -> R^N with its Jacobian.
class Diffeomorphism {
 public:
  virtual ~Diffeomorphism() = default;
  virtual int dim() const = 0;
  virtual Vec map(const Vec& x) const = 0;
  virtual Mat jacobian(const Vec& x) const = 0;
};

/// x -> A x + b.
class AffineMap final : public Diffeomorphism {
 public:
  AffineMap(Mat a, Vec b) : a_(std::move(a)), b_(std::move(b)) {}
  static AffineMap scaling(int dim, double factor);
  int dim() const override { return static_cast<int>(b_.size()); }
  Vec map(const Vec& x) const override { return a_ * x + b_; }
  Mat jacobian(const Vec&) const override { return a_; }

 private:
  Mat a_;
  Vec b_;
};

/// Phi_rho(x', x_N) = (x', x_N + eta_rho(x') phi(x')), eta_rho(t) = quintic_bump(|t| / rho).
class FlatteningMap final : public Diffeomorphism {
 public:
  FlatteningMap(BoundaryGraph phi, double rho, int dim);

  int dim() const override { return dim_; }
  double rho() const { return rho_; }
  Vec map(const Vec& x) const override;
  Mat jacobian(const Vec& x) const override;
  double cutoff(const Vec& tangent) const;
  /// sup |D Phi - id| over a dense sample of B'_rho (operator norm).
  double jacobian_deviation(int samples_per_axis = 2048) const;

 private:
  Vec shear_gradient(const Vec& tangent) const;

  BoundaryGraph phi_;
  double rho_;
  int dim_;
};

/// Builds Phi_rho for a graph domain; throws ScaleTooLarge when sup |D Phi - id| >= 1/4.
FlatteningMap build_flattening(const Domain& domain, double rho, bool enforce_bound = true);

}  // namespace nlreg
