#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlreg/funcspace.hpp"
#include "nlreg/operators.hpp"

#include <cmath>
#include <numbers>

using namespace nlreg;

TEST_CASE("pointwise operator annihilates the half-line profile") {
  for (double s : {0.25, 0.5, 0.75}) {
    const Kernel k = Kernel::mu(s, 1);
    const ScalarFn u = [s](const Vec& x) { return std::pow(positive_part(x(0)), s); };
    for (double x : {0.3, 1.0}) CHECK(std::abs(apply_point(k, u, make_vec({x}))) < 1e-5);
  }
}

TEST_CASE("pointwise operator on the torsion function of the interval") {
  // sin(pi s) / pi (1 - x^2)_+^s has L u = 1 on (-1, 1) for the unit-normalized kernel.
  for (double s : {0.3, 0.7}) {
    const Kernel k = Kernel::mu(s, 1);
    const ScalarFn u = [s](const Vec& x) {
      return std::sin(std::numbers::pi * s) / std::numbers::pi * std::pow(positive_part(1.0 - x(0) * x(0)), s);
    };
    for (double x : {0.0, 0.5, -0.8}) CHECK(apply_point(k, u, make_vec({x})) == doctest::Approx(1.0).epsilon(1e-4));
  }
}

TEST_CASE("action on d^s") {
  const Kernel k = Kernel::mu(0.5, 1);
  const Domain half = Domain::half_space(1);
  ActionOnDsOptions opts;
  opts.cutoff = false;
  CHECK(std::abs(action_on_ds(k, half, make_vec({0.4}), {}, opts)) < 1e-5);
  try {
    action_on_ds(k, half, make_vec({-0.4}));
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::InvalidArgument);
  }
}

TEST_CASE("Riesz potential") {
  CHECK(riesz_potential(0.25, 1, make_vec({4.0})) == doctest::Approx(0.5));
  CHECK(riesz_potential(0.5, 2, make_vec({3.0, 4.0})) == doctest::Approx(0.2));
  try {
    riesz_potential(0.5, 2, make_vec({0.0, 0.0}));
    FAIL("expected Origin");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Origin);
  }
}

TEST_CASE("Bessel potential against the Macdonald-function closed form") {
  // G(x) = (4 pi)^{-N/2} / Gamma(s) 2 (|x|/2)^{s - N/2} K_{|s - N/2|}(|x|).
  auto closed = [](double s, const Vec& x) {
    const double n = static_cast<double>(x.size()), r = x.norm();
    return std::pow(4.0 * std::numbers::pi, -0.5 * n) / std::tgamma(s) * 2.0 * std::pow(0.5 * r, s - 0.5 * n) *
           std::cyl_bessel_k(std::abs(s - 0.5 * n), r);
  };
  for (double s : {0.25, 0.6, 1.3})
    for (const Vec& x : {make_vec({0.1}), make_vec({2.5}), make_vec({0.3, 0.4}), make_vec({-3.0, 1.0})})
      CHECK(bessel_potential(s, 1.0, x) == doctest::Approx(closed(s, x)).epsilon(1e-10));
  // s = 1 in one dimension is e^{-|x|} / 2.
  CHECK(bessel_potential(1.0, 1.0, make_vec({0.7})) == doctest::Approx(0.5 * std::exp(-0.7)).epsilon(1e-12));
  // Scale r: G_r(x) = G_1(x / r).
  CHECK(bessel_potential(0.6, 2.0, make_vec({1.0})) == doctest::Approx(closed(0.6, make_vec({0.5}))).epsilon(1e-10));
  CHECK_THROWS_AS(bessel_potential(0.5, 1.0, make_vec({0.0})), Error);
}

TEST_CASE("decay envelope of a bump") {
  const Kernel k = Kernel::mu(0.5, 1);
  const ScalarFn psi = [](const Vec& x) { return quintic_bump(std::abs(x(0))); };
  const DecayEnvelope env = decay_envelope(k, psi, {2.0, 4.0, 8.0, 16.0});
  CHECK(env.min > 0.0);
  CHECK(env.spread() < 3.0);
  // Far away L psi(x) = -|x|^{-1-2s} int psi.
  const double mass = 2.0 * (0.5 + 0.25);
  CHECK(env.scaled.back() == doctest::Approx(mass).epsilon(0.05));
}

TEST_CASE("action on d^s stays bounded near a curved boundary") {
  // Parabola boundary (gamma = 1 > s): |L(phi_2 d^s)| <= C max(d^{gamma - s}, 1), i.e. no blow-up
  // as d -> 0. The log-log slope of |g| against d must not be negative beyond the fit noise.
  const Domain p = Domain::graph(BoundaryGraph::parabola(1, 1.0), 1.0, 2);
  const Kernel k = Kernel::mu(0.5, 2);
  std::vector<double> d{0.1, 0.05, 0.025, 0.0125}, g;
  for (double t : d) g.push_back(std::abs(action_on_ds(k, p, make_vec({0.0, t}))));
  const LogLogFit f = fit_loglog(d, g);
  CHECK(f.slope >= -0.1);
  for (double v : g) CHECK(std::isfinite(v));
}
