#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlreg/diagnostics.hpp"

#include <cmath>

using namespace nlreg;

namespace {

const Grid kLine = Grid::cover(make_vec({-1.0}), make_vec({1.0}), 1.0 / 1024);

DiscreteField sample(const ScalarFn& f) { return DiscreteField::sample(kLine, f); }

std::vector<double> dyadic(double lo, double hi) {
  std::vector<double> r;
  for (double x = lo; x <= hi * (1 + 1e-12); x *= 2) r.push_back(x);
  return r;
}

}  // namespace

TEST_CASE("ball quadrature integrates polynomials exactly") {
  const BallQuadrature q = ball_quadrature(sample([](const Vec& x) { return x(0); }), make_vec({0.1}), 0.3);
  double vol = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < q.points.size(); ++i) {
    vol += q.weights[i];
    m2 += q.weights[i] * q.points[i](0) * q.points[i](0);
  }
  CHECK(vol == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(m2 == doctest::Approx((std::pow(0.4, 3) + std::pow(0.2, 3)) / 3).epsilon(1e-12));
}

TEST_CASE("projection onto d^s") {
  const Domain half = Domain::half_space(1);
  const double s = 0.5;
  const BoundaryProjection one = project_ds(sample([s](const Vec& x) { return std::pow(positive_part(x(0)), s); }), half,
                                            make_vec({0.0}), 0.25, s);
  CHECK(one.Q == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(one.orthogonality < 1e-3);
  CHECK(project_ds(sample([](const Vec&) { return 0.0; }), half, make_vec({0.0}), 0.25, s).Q == 0.0);
  // u = x: Q = int_0^r x^{3/2} / int_0^r x = 0.8 r^{1/2}.
  const BoundaryProjection lin = project_ds(sample([](const Vec& x) { return x(0); }), half, make_vec({0.0}), 0.25, s);
  CHECK(lin.Q == doctest::Approx(0.4).epsilon(1e-6));
  CHECK(lin.orthogonality < 1e-10);
  try {
    project_ds(sample([](const Vec& x) { return x(0); }), Domain::half_space(1), make_vec({-0.5}), 0.25, s);
    FAIL("expected DegenerateDenominator");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DegenerateDenominator);
  }
}

TEST_CASE("affine projection") {
  // t = mean of x^2 on [-1/2, 1/2]; no linear part for s <= 1/2.
  const AffineProjection sq = project_affine(sample([](const Vec& x) { return x(0) * x(0); }), make_vec({0.0}), 0.5, 0.5);
  CHECK(sq.t == doctest::Approx(1.0 / 12).epsilon(1e-5));
  CHECK(sq.T.norm() == 0.0);
  // x^3 at s = 3/4 on [-1/2, 1/2]: T = int x^4 / int x^2 = 3 r^2 / 5.
  const AffineProjection cube = project_affine(sample([](const Vec& x) { return x(0) * x(0) * x(0); }), make_vec({0.0}), 0.5, 0.75);
  CHECK(std::abs(cube.t) < 1e-10);
  CHECK(cube.T(0) == doctest::Approx(0.15).epsilon(1e-4));
  CHECK(cube.orthogonality < 1e-8);
}

TEST_CASE("boundary growth of d^s") {
  const Domain iv = Domain::interval(-1.0, 1.0);
  for (double s : {0.25, 0.5, 0.75}) {
    const DiscreteField u = sample([&](const Vec& x) { return std::pow(iv.dist(x), s); });
    const GrowthProbe g = boundary_growth(u, iv, iv.boundary_points_1d(), dyadic(1.0 / 256, 0.5), s);
    CHECK(g.alpha == doctest::Approx(s).epsilon(0.03));
    CHECK(g.verdict == Verdict::Pass);
  }
  try {
    boundary_growth(sample([](const Vec&) { return 1.0; }), iv, iv.boundary_points_1d(), dyadic(1.0 / 256, 1.0), 0.5);
    FAIL("expected RadiusEscapesDomain");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::RadiusEscapesDomain);
  }
}

TEST_CASE("interior growth") {
  const Domain big = Domain::interval(-2.0, 2.0);
  const std::vector<Vec> origin{make_vec({0.0})};
  const std::vector<double> radii = dyadic(1.0 / 128, 0.5);
  // Oscillation of |x|^gamma about its mean grows like r^gamma. The cusp needs a finer sample:
  // the interpolation error adds a cross term of order h^{1+gamma} r^gamma to the masses.
  const Grid fine = Grid::cover(make_vec({-1.0}), make_vec({1.0}), 1.0 / 4096);
  for (double gamma : {0.5, 0.7}) {
    const DiscreteField u = DiscreteField::sample(fine, [gamma](const Vec& x) { return std::pow(std::abs(x(0)), gamma); });
    const GrowthProbe g = interior_growth(u, big, origin, dyadic(1.0 / 64, 0.5), gamma);
    CHECK(g.alpha == doctest::Approx(gamma).epsilon(0.03));
    CHECK(g.verdict == Verdict::Pass);
  }
  const GrowthProbe zero = interior_growth(sample([](const Vec&) { return 0.0; }), big, origin, radii, 0.5);
  CHECK(zero.all_zero);
  CHECK(zero.verdict == Verdict::Inconclusive);
  const GrowthProbe aff = interior_growth(sample([](const Vec& x) { return 1.0 + 2.0 * x(0); }), big, origin, radii, 1.0,
                                          true, 0.75);
  CHECK(aff.at_cap);
  CHECK(aff.alpha_label().find("cap") != std::string::npos);
  try {
    interior_growth(sample([](const Vec&) { return 0.0; }), big, origin, {1.0 / 2048, 1.0 / 64, 1.0 / 16, 0.25}, 0.5);
    FAIL("expected a radius below resolution to be rejected");
  } catch (const Error&) {
  }
}

TEST_CASE("u / d^s quotient regularity") {
  const Domain iv = Domain::interval(-1.0, 1.0);
  const double s = 0.5;
  // u = d^{2s}: the quotient is d^s. The 2h collar, where the quotient is frozen, biases the fit
  // up by a few hundredths at this resolution.
  const Grid fine = Grid::cover(make_vec({-1.0}), make_vec({1.0}), 1.0 / 4096);
  const DiscreteField u = DiscreteField::sample(fine, [&](const Vec& x) { return std::pow(iv.dist(x), 2 * s); });
  const QuotientReport q = quotient_regularity(u, iv, 1.0, s, dyadic(1.0 / 64, 0.25));
  CHECK(q.exponent == doctest::Approx(s).epsilon(0.1));
  CHECK(q.psi.size() == 2);
  // u = d^s (1 + d): the quotient 1 + d is Lipschitz.
  const DiscreteField lip = sample([&](const Vec& x) { return std::pow(iv.dist(x), s) * (1 + iv.dist(x)); });
  const QuotientReport ql = quotient_regularity(lip, iv, 1.0, s, dyadic(1.0 / 128, 0.25));
  CHECK(ql.exponent >= 0.95);
  // psi extrapolates Q(r) = 1 + r (2s + 1) / (2s + 2) to 1; interpolating d^s at 4h costs a few percent.
  CHECK(ql.psi.front() == doctest::Approx(1.0).epsilon(5e-2));
  try {
    quotient_regularity(u, iv, 4.0 / 4096, s, dyadic(1.0 / 128, 0.25));
    FAIL("expected StripTooThin");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::StripTooThin);
  }
}

TEST_CASE("coercivity with a vanishing potential is trivial") {
  const CoercivityReport r = coercivity_check({[](const Vec&) { return 0.0; }, {}}, 0.5, {0.5, 0.25});
  CHECK(r.trivial);
  CHECK(r.verdict == Verdict::Pass);
}

TEST_CASE("distance to the Liouville families") {
  const Region reg{make_vec({-0.5}), make_vec({0.5})};
  CHECK(liouville_distance(sample([](const Vec& x) { return 3.0 - x(0); }), LiouvilleTarget::Affine, 0.75, reg) < 1e-12);
  CHECK(liouville_distance(sample([](const Vec& x) { return 2.0 * std::pow(positive_part(x(0)), 0.25); }),
                           LiouvilleTarget::HalfSpaceProfile, 0.25, reg) < 1e-12);
  CHECK(liouville_distance(sample([](const Vec& x) { return x(0) * x(0); }), LiouvilleTarget::Affine, 0.75, reg) > 1e-2);
  try {
    liouville_distance(sample([](const Vec&) { return 0.0; }), LiouvilleTarget::Affine, 0.75, reg);
    FAIL("expected EmptyField");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::EmptyField);
  }
}
