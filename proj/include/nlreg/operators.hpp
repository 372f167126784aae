// Pointwise principal-value application of L_K, the Dirichlet form, the action on d^s and the
// Riesz/Bessel potentials.
#pragma once

#include "nlreg/core.hpp"
#include "nlreg/geometry.hpp"
#include "nlreg/grid.hpp"
#include "nlreg/kernels.hpp"

#include <vector>

namespace nlreg {

/// L_K u(x) = PV int (u(x) - u(y)) K(x, y) dy.
double apply_point(const Kernel& k, const ScalarFn& u, const Vec& x, const PVConfig& cfg = {});
/// Field version: the second-difference switch radius is raised to at least 8h.
double apply_point(const Kernel& k, const DiscreteField& u, const Vec& x, PVConfig cfg = {});

struct BilinearFormValue {
  double value = 0.0;
  double error = 0.0;
};

/// E_K(u, psi) for nodal fields on the same grid; psi must vanish within 2h of the box edge.
BilinearFormValue bilinear_form(const Kernel& k, const DiscreteField& u, const DiscreteField& psi);

struct ActionOnDsOptions {
  bool cutoff = true;      ///< apply to phi_2 d^s (phi_2 = 1 on B_2, 0 outside B_4) or to d^s itself
  Vec cutoff_center;       ///< defaults to the origin
};
/// L_K(phi_2 d^s)(x).
double action_on_ds(const Kernel& k, const Domain& domain, const Vec& x, const PVConfig& cfg = {},
                    const ActionOnDsOptions& opts = {});

/// |z|^{2s-N}; Origin at z = 0.
double riesz_potential(double s, int dim, const Vec& z);
/// Kernel of (1 - Delta)^{-s} at x / r_scale, by the heat-kernel subordination integral.
double bessel_potential(double s, double r_scale, const Vec& x);

struct DecayEnvelope {
  std::vector<double> radii, scaled;  ///< |L psi(x)| (1 + |x|^{N+2s})
  double min = 0.0, max = 0.0;
  double spread() const { return min > 0.0 ? max / min : std::numeric_limits<double>::infinity(); }
};
/// Samples |L_K psi(r e_1)| (1 + r^{N+2s}) for r in `radii`.
DecayEnvelope decay_envelope(const Kernel& k, const ScalarFn& psi, const std::vector<double>& radii,
                             const PVConfig& cfg = {});

}  // namespace nlreg
