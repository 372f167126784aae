// Jump kernels K(x, y), their polar extension r^{N+2s} K(x, x + r theta) and kernel-class checks.
#pragma once

#include "nlreg/core.hpp"
#include "nlreg/geometry.hpp"

#include <cstdint>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace nlreg {

/// Principal-value quadrature settings shared by the operator and drift integrals.
struct PVConfig {
  double eps = 1e-4;          ///< inner radius of the odd-part annuli
  double delta_sd = 1e-2;     ///< below this radius second differences are handled analytically
  double R = 64.0;            ///< truncation radius; [R, inf) is integrated on a mapped interval
  double panel_width = 0.25;  ///< maximal radial panel width
  int angular_nodes = 64;     ///< midpoint nodes on the half circle (N = 2)
  double tol = 1e-10;         ///< relative tolerance per radial panel
  unsigned max_depth = 10;
  double cauchy_tol = 1e-3;   ///< relative Cauchy tolerance on the last annulus

  void validate() const;
};

/// Even density on the unit sphere with Lambda <= a <= 1/Lambda.
struct AnisotropyDensity {
  std::string name = "1";
  std::function<double(const Vec&)> a = [](const Vec&) { return 1.0; };
  double ellipticity = 1.0;

  double operator()(const Vec& theta) const { return a(theta); }

  static AnisotropyDensity constant(double value);
  /// N = 2: a(theta) = 1 + eps cos(2 angle).
  static AnisotropyDensity cosine(double eps);
  /// theta -> |J theta|^{-N-2s} for a frozen Jacobian J.
  static AnisotropyDensity frozen_jacobian(const Mat& jacobian, double s);

  /// max |a(theta) - a(-theta)| and the observed range over a symmetric sample.
  struct Check {
    double even_residual = 0.0;
    double min_value = 0.0, max_value = 0.0;
    bool ok = false;
  };
  Check check(int dim, int samples = 256) const;
};

/// Isotropic reference kernel |x - y|^{-N-2s}.
double mu1(const Vec& x, const Vec& y, double s);

class Kernel {
 public:
  struct Mu {
    AnisotropyDensity b;
  };
  /// K = mu_a + lambda mu_1.
  struct Perturbed {
    AnisotropyDensity a;
    std::function<double(const Vec&, const Vec&)> lambda;
    std::string name;
  };
  /// K(x, y) = base(Phi(x), Phi(y)).
  struct Diffeo {
    std::shared_ptr<const Diffeomorphism> map;
    std::shared_ptr<const Kernel> base;
    int tau_nodes = 32;
  };
  /// K(x, y) = rho^{N+2s} base(rho x + x0, rho y + x0).
  struct Rescaled {
    double rho;
    Vec x0;
    std::shared_ptr<const Kernel> base;
  };
  struct General {
    std::function<double(const Vec&, const Vec&)> k;
    double tail_exponent;  ///< K(x, x+y) = O(|y|^{-tail_exponent}) as |y| -> inf
    std::string name;
  };
  using Variant = std::variant<Mu, Perturbed, Diffeo, Rescaled, General>;

  Kernel(Variant v, double s, int dim, double kappa = 1.0);

  static Kernel mu(double s, int dim, AnisotropyDensity b = {});
  static Kernel perturbed(double s, int dim, AnisotropyDensity a,
                          std::function<double(const Vec&, const Vec&)> lambda, std::string name,
                          double kappa);
  static Kernel diffeo(std::shared_ptr<const Diffeomorphism> map, std::shared_ptr<const Kernel> base,
                       int tau_nodes = 32);
  static Kernel rescaled(std::shared_ptr<const Kernel> base, double rho, const Vec& x0);
  static Kernel general(double s, int dim, std::function<double(const Vec&, const Vec&)> k,
                        double tail_exponent, std::string name, double kappa = 1.0);

  double s() const { return s_; }
  int dim() const { return dim_; }
  double kappa() const { return kappa_; }
  const Variant& variant() const { return v_; }

  /// K(x, y); throws DiagonalPoint when |x - y| < 1e-14.
  double operator()(const Vec& x, const Vec& y) const;
  double eval(const Vec& x, const Vec& y) const { return (*this)(x, y); }

  /// r^{N+2s} K(x, x + r theta); r = 0 is the frozen-coefficient limit.
  double polar(const Vec& x, double r, const Vec& theta) const;
  double polar_even(const Vec& x, double r, const Vec& theta) const;
  double polar_odd(const Vec& x, double r, const Vec& theta) const;

  bool has_zero_limit() const;
  /// Translation invariant with an even density (the odd part vanishes identically).
  bool is_even_translation_invariant() const { return std::holds_alternative<Mu>(v_); }
  /// Density of a Mu kernel (InvalidArgument otherwise).
  const AnisotropyDensity& density() const;

  std::string describe() const;

 private:
  double raw(const Vec& x, const Vec& y) const;

  Variant v_;
  double s_;
  int dim_;
  double kappa_;
};

/// Directions on a half sphere with quadrature weights (full-sphere integrals of even
/// integrands equal twice the weighted sum). N = 1: {+1}; N = 2: midpoint rule on [0, pi).
struct Direction {
  Vec theta;
  double weight;
};
std::vector<Direction> half_sphere_rule(int dim, int nodes);

/// (2s-1)_+ PV int y (K(x, x+y) - K(x, x-y)) dy via matched symmetric annuli.
Vec drift_field(const Kernel& k, const Vec& x, const PVConfig& cfg = {});

struct KernelClassReport {
  double kappa_fit = 0.0;  ///< largest kappa with kappa mu1 <= K <= mu1 / kappa on the sample
  double lambda_sup = 0.0; ///< sup |K - mu_a| / mu1 on the sample
  double symmetry_residual = 0.0;  ///< max |K(x,y) - K(y,x)| / mu1
  int samples = 0;
};

/// Samples pairs x != y uniformly in B_radius(center) with a seeded generator.
KernelClassReport verify_kernel_class(const Kernel& k, const AnisotropyDensity& a, const Vec& center,
                                      double radius, int samples, std::uint64_t seed = 0x5EED);

/// inf over sampled unit eta of int_{S^{N-1}} |eta . theta|^{2s} b(theta) dtheta, and the
/// isotropic reference Lambda int |e_1 . theta|^{2s} dtheta.
struct CoercivityFunctional {
  double inf_value = 0.0;
  double reference = 0.0;
  bool holds = false;
};
CoercivityFunctional anisotropy_coercivity(const AnisotropyDensity& b, double s, int dim,
                                           int eta_samples = 64);

}  // namespace nlreg
