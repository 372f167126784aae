// Galerkin discretization of L_K u + V u = f in Omega, u = g outside, on nodal hat functions.
#pragma once

#include "nlreg/core.hpp"
#include "nlreg/funcspace.hpp"
#include "nlreg/geometry.hpp"
#include "nlreg/grid.hpp"
#include "nlreg/kernels.hpp"
#include "nlreg/operators.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace nlreg {

/// E_{mu_1}(chi_0, chi_k) for the hat basis with spacing h (1D closed form).
double hat_stiffness_1d(long k, double s, double h);
/// Same entry by applying L_{mu_1} to the autocorrelation of the hat (any N <= 2).
double hat_stiffness_reference(const std::array<int, kMaxDim>& k, int dim, double s, double h,
                               const PVConfig& cfg = {});

struct AssemblyOptions {
  int ring_layers = -1;               ///< lattice layers outside the box kept explicitly (-1: 32 in 1D, 2 in 2D)
  std::size_t max_bytes = std::size_t{3} << 30;
};

/// The Dirichlet form on all box nodes, with everything beyond the box folded in.
struct StiffnessOperator {
  Grid grid;
  Eigen::MatrixXd full;            ///< E_K(chi_i, chi_j) on box nodes, row-sum diagonal
  Eigen::VectorXd exterior_rhs;    ///< -(sum over lattice nodes beyond the box of A_ij g_j)
  double tail_error = 0.0;         ///< accumulated quadrature error estimate of the tail integrals
};
StiffnessOperator assemble_operator(const Kernel& k, const Grid& grid, const FarField& exterior,
                                    const AssemblyOptions& opts = {});

struct DirichletProblem {
  std::shared_ptr<const Kernel> kernel;
  Domain domain;
  Grid grid;
  ScalarSource f{[](const Vec&) { return 0.0; }, {}};
  std::optional<ScalarSource> V;
  FarField exterior;  ///< u outside Omega (zero by default)
};

struct StiffnessSystem {
  StiffnessOperator op;
  std::vector<std::size_t> active;   ///< box nodes inside Omega
  std::vector<std::size_t> fixed;    ///< box nodes outside Omega
  Eigen::VectorXd g_box;             ///< exterior data at box nodes
  Eigen::VectorXd potential;         ///< lumped int V chi_i on active nodes
  Eigen::VectorXd load;              ///< int f chi_i on active nodes
  Eigen::MatrixXd A;                 ///< active block including the potential
  Eigen::VectorXd rhs;               ///< load minus the exterior coupling
  FarField exterior;
};
StiffnessSystem assemble(const DirichletProblem& problem, const AssemblyOptions& opts = {});
/// int f chi_i over the active nodes of a grid.
Eigen::VectorXd load_vector(const ScalarSource& f, const Grid& grid, const std::vector<std::size_t>& nodes);
/// Recomputes rhs after the load changed.
void refresh_rhs(StiffnessSystem& system);

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 0;  ///< 0: 10 * unknowns
  bool jacobi = true;
};
struct SolveResult {
  DiscreteField u;
  int iterations = 0;
  double residual = 0.0;  ///< relative, in the preconditioned-free norm
};
SolveResult solve(const StiffnessSystem& system, const SolveOptions& opts = {});

/// max_i |(A u - rhs)_i| / max_i |rhs_i| over the active nodes.
double galerkin_residual(const StiffnessSystem& system, const DiscreteField& u);
/// E_K(u_h, u_h) with the exterior coupling, without the potential.
double discrete_energy(const StiffnessSystem& system, const DiscreteField& u);

struct LocalizeResult {
  std::function<double(const Vec&)> v;   ///< phi_R u
  std::function<double(const Vec&)> G;   ///< phi_{R/2}(x) int u(y)(phi_R(x) - phi_R(y)) K(x, y) dy
  double identity_residual = 0.0;        ///< max |L v - phi_R L u - G| on the samples
  double solution_residual = 0.0;        ///< max |L v - f - G| on the samples
};
LocalizeResult localize(const DiscreteField& u, const Kernel& k, double R, const ScalarSource& f,
                        const std::vector<Vec>& samples, const PVConfig& cfg = {});

struct CaccioppoliReport {
  double lhs = 0.0, rhs = 0.0;
  double constant() const { return rhs > 0.0 ? lhs / rhs : 0.0; }
  bool holds() const { return lhs <= rhs * (1 + 1e-12); }
};
/// (1 - eps) int int (v(x)-v(y))^2 phi^2(y) K  versus  int |f||v| phi^2 + eps^{-1} int int v^2(x)(phi(x)-phi(y))^2 K.
CaccioppoliReport caccioppoli(const DiscreteField& v, const Kernel& k, const ScalarSource& f, const Cutoff& phi,
                              double eps = 0.5);

}  // namespace nlreg
