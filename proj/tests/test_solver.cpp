#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlreg/solver.hpp"

#include <cmath>
#include <numbers>

using namespace nlreg;

namespace {

DirichletProblem interval_problem(double s, double h, ScalarSource f, FarField g = FarField::zero()) {
  return {std::make_shared<Kernel>(Kernel::mu(s, 1)), Domain::interval(-1.0, 1.0),
          Grid::cover(make_vec({-1.0}), make_vec({1.0}), h), std::move(f), std::nullopt, std::move(g)};
}

const ScalarSource kOne{[](const Vec&) { return 1.0; }, {}};

}  // namespace

TEST_CASE("closed-form 1D hat stiffness against the quadrature route") {
  const double h = 1.0 / 64;
  for (double s : {0.25, 0.5, 0.75}) {
    const double a0 = hat_stiffness_1d(0, s, h);
    CHECK(a0 > 0.0);
    for (long k = 1; k <= 5; ++k) CHECK(hat_stiffness_1d(k, s, h) < 0.0);
    for (int k : {0, 1, 2, 3, 5}) {
      const double closed = hat_stiffness_1d(k, s, h);
      const double ref = hat_stiffness_reference({k, 0, 0}, 1, s, h);
      const double tol = k <= 2 ? 5e-4 * a0 : 1e-8 * a0;
      CHECK(std::abs(closed - ref) <= tol);
    }
    // Far entries follow the kernel: a_k ~ -h^{2 - 2s} k^{-1-2s}.
    const double far = hat_stiffness_1d(200, s, h);
    CHECK(far == doctest::Approx(-std::pow(h, 1 - 2 * s) * std::pow(200.0, -1 - 2 * s)).epsilon(1e-3));
  }
}

TEST_CASE("torsion problem on the interval") {
  for (double s : {0.25, 0.5, 0.75}) {
    const StiffnessSystem sys = assemble(interval_problem(s, 1.0 / 256, kOne));
    const SolveResult res = solve(sys);
    CHECK(res.residual <= 1e-10);
    CHECK(galerkin_residual(sys, res.u) < 1e-8);
    const double c = std::sin(std::numbers::pi * s) / std::numbers::pi;
    double err = 0.0;
    for (std::size_t i = 0; i < res.u.grid().size(); ++i) {
      const double x = res.u.grid().node(i)(0);
      if (std::abs(x) > 0.5) continue;
      err = std::max(err, std::abs(res.u[i] - c * std::pow(1 - x * x, s)));
    }
    CHECK(err <= 5e-3);
    CHECK(discrete_energy(sys, res.u) > 0.0);
  }
}

TEST_CASE("affine exterior data is reproduced for s > 1/2") {
  const double s = 0.75;
  const FarField g = FarField::function([](const Vec& x) { return 0.2 + 0.5 * x(0); }, 1.0, "affine");
  const SolveResult res = solve(assemble(interval_problem(s, 1.0 / 128, {[](const Vec&) { return 0.0; }, {}}, g)));
  double err = 0.0;
  for (std::size_t i = 0; i < res.u.grid().size(); ++i)
    err = std::max(err, std::abs(res.u[i] - (0.2 + 0.5 * res.u.grid().node(i)(0))));
  CHECK(err < 1e-3);
}

TEST_CASE("solver failures are typed") {
  DirichletProblem p = interval_problem(0.5, 1.0 / 64, kOne);
  p.V = ScalarSource{[](const Vec&) { return -1e4; }, {}};
  try {
    solve(assemble(p));
    FAIL("expected NotPositiveDefinite");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotPositiveDefinite);
  }
  AssemblyOptions tiny;
  tiny.max_bytes = 1024;
  try {
    assemble(interval_problem(0.5, 1.0 / 64, kOne), tiny);
    FAIL("expected OutOfMemory");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::OutOfMemory);
  }
  SolveOptions few;
  few.max_iter = 2;
  try {
    solve(assemble(interval_problem(0.5, 1.0 / 64, kOne)), few);
    FAIL("expected MaxIterExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::MaxIterExceeded);
  }
}

TEST_CASE("Caccioppoli inequality on a discrete solution") {
  const auto p = interval_problem(0.5, 1.0 / 128, kOne);
  const SolveResult res = solve(assemble(p));
  const CaccioppoliReport c = caccioppoli(res.u, *p.kernel, p.f, Cutoff{0.25, make_vec({0.0})});
  CHECK(c.lhs > 0.0);
  CHECK(c.holds());
}
