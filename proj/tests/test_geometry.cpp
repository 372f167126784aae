#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlreg/geometry.hpp"

#include <cmath>
#include <random>

using namespace nlreg;

TEST_CASE("distance to the complement") {
  const Domain iv = Domain::interval(-1.0, 1.0);
  CHECK(iv.dist(make_vec({0.25})) == doctest::Approx(0.75));
  CHECK(iv.dist(make_vec({1.5})) == 0.0);
  CHECK(iv.on_boundary(make_vec({-1.0})));
  CHECK(iv.boundary_points_1d().size() == 2);
  CHECK(iv.regularity_radius() == doctest::Approx(0.5));

  const Domain ball = Domain::ball(make_vec({1.0, 0.0}), 2.0);
  CHECK(ball.dist(make_vec({1.5, 0.0})) == doctest::Approx(1.5));

  const Domain half = Domain::half_space(2);
  CHECK(half.dist(make_vec({3.0, 0.4})) == doctest::Approx(0.4));
  CHECK(half.dist(make_vec({3.0, -0.4})) == 0.0);
  CHECK(std::isinf(half.diameter()));
}

TEST_CASE("graph domain distance matches the parabola normal foot") {
  const Domain p = Domain::graph(BoundaryGraph::parabola(1, 1.0), 1.0, 2);
  // On the axis the foot of the normal is the vertex.
  CHECK(p.dist(make_vec({0.0, 0.3})) == doctest::Approx(0.3).epsilon(1e-10));
  // Point on the curve itself.
  CHECK(p.dist(make_vec({0.2, 0.02})) < 1e-10);
  // Independent route: minimize |x - (t, t^2/2)| by dense sampling.
  const Vec x = make_vec({0.3, 0.4});
  double best = 1e9;
  for (int i = -200000; i <= 200000; ++i) {
    const double t = i * 1e-5;
    best = std::min(best, std::hypot(x(0) - t, x(1) - 0.5 * t * t));
  }
  CHECK(p.dist(x) == doctest::Approx(best).epsilon(1e-8));
}

TEST_CASE("tubular integrals of d^delta") {
  // 1D half line: int_{-r}^{r} max(x, 0)^delta = r^{1+delta} / (1 + delta).
  const Domain h1 = Domain::half_space(1);
  for (double delta : {0.0, 0.5, 1.5})
    CHECK(tubular_integral(h1, make_vec({0.0}), 0.3, delta) ==
          doctest::Approx(std::pow(0.3, 1 + delta) / (1 + delta)).epsilon(1e-8));
  // 2D half plane: r^{2+delta} Gamma((delta+1)/2) Gamma(3/2) / Gamma((delta+4)/2).
  const Domain h2 = Domain::half_space(2);
  for (double delta : {0.0, 0.5, 1.0}) {
    const double oracle = std::pow(0.5, 2 + delta) * std::tgamma(0.5 * (delta + 1)) * std::tgamma(1.5) /
                          std::tgamma(0.5 * (delta + 4));
    CHECK(tubular_integral(h2, make_vec({0.0, 0.0}), 0.5, delta) == doctest::Approx(oracle).epsilon(1e-7));
  }
  const TubularConstants c = tubular_constants(h2, make_vec({0.0, 0.0}), 0.5, {0.1, 0.2, 0.4});
  CHECK(c.lower == doctest::Approx(c.upper).epsilon(1e-7));
}

TEST_CASE("quintic bump profile") {
  CHECK(quintic_bump(0.0) == 1.0);
  CHECK(quintic_bump(0.5) == 1.0);
  CHECK(quintic_bump(1.0) == 0.0);
  CHECK(quintic_bump(3.0) == 0.0);
  CHECK(quintic_bump(0.75) == doctest::Approx(0.5));
  // First derivative against central differences, and continuity at the joints.
  for (double t : {0.55, 0.7, 0.9}) {
    const double fd = (quintic_bump(t + 1e-6) - quintic_bump(t - 1e-6)) / 2e-6;
    CHECK(quintic_bump_derivative(t) == doctest::Approx(fd).epsilon(1e-6));
  }
  CHECK(std::abs(quintic_bump_derivative(0.5)) < 1e-12);
  CHECK(std::abs(quintic_bump_derivative(1.0)) < 1e-12);
}

TEST_CASE("flattening shear") {
  const Domain p = Domain::graph(BoundaryGraph::parabola(1, 1.0), 1.0, 2);
  CHECK_THROWS_AS(build_flattening(p, 5.0), Error);
  try {
    build_flattening(p, 5.0);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ScaleTooLarge);
  }
  const FlatteningMap phi = build_flattening(p, 0.25);
  CHECK(phi.jacobian_deviation() < 0.25);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Vec x = make_vec({u(rng), u(rng)});
    CHECK(phi.jacobian(x).determinant() == doctest::Approx(1.0).epsilon(1e-14));
  }
  // The flat boundary maps onto the curved one where the cutoff equals 1.
  for (double t : {-0.1, 0.0, 0.05, 0.12}) CHECK(p.dist(phi.map(make_vec({t, 0.0}))) < 1e-10);
  // Identity outside the cutoff support.
  const Vec far = make_vec({0.5, 0.3});
  CHECK((phi.map(far) - far).norm() == 0.0);
}

TEST_CASE("affine maps") {
  const AffineMap m = AffineMap::scaling(2, 3.0);
  CHECK((m.map(make_vec({1.0, 2.0})) - make_vec({3.0, 6.0})).norm() < 1e-15);
  CHECK(m.jacobian(make_vec({0.0, 0.0})).determinant() == doctest::Approx(9.0));
}
