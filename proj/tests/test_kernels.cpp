#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlreg/kernels.hpp"

#include <cmath>
#include <numbers>

using namespace nlreg;

TEST_CASE("kernel construction rejects bad parameters") {
  CHECK_THROWS_AS(Kernel::mu(1.0, 1), Error);
  CHECK_THROWS_AS(Kernel::mu(0.5, 4), Error);
  const Kernel k = Kernel::mu(0.5, 1);
  try {
    k(make_vec({0.2}), make_vec({0.2}));
    FAIL("expected DiagonalPoint");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DiagonalPoint);
  }
}

TEST_CASE("isotropic kernel values and polar extension") {
  const double s = 0.3;
  const Kernel k = Kernel::mu(s, 2);
  const Vec x = make_vec({0.1, 0.2}), y = make_vec({0.5, -0.1});
  CHECK(k(x, y) == doctest::Approx(std::pow((x - y).norm(), -2 - 2 * s)));
  CHECK(k.polar(x, 0.7, make_vec({0.6, 0.8})) == doctest::Approx(1.0));
  CHECK(k.polar_odd(x, 0.7, make_vec({0.6, 0.8})) == 0.0);
}

TEST_CASE("rescaling leaves the homogeneous kernel invariant") {
  const double s = 0.6;
  auto base = std::make_shared<Kernel>(Kernel::mu(s, 2));
  const Kernel kr = Kernel::rescaled(base, 0.3, make_vec({1.0, -2.0}));
  const Vec x = make_vec({0.2, 0.1}), y = make_vec({-0.4, 0.3});
  CHECK(kr(x, y) == doctest::Approx((*base)(x, y)).epsilon(1e-12));
}

TEST_CASE("kernel transported by a linear map") {
  // K_Phi(x, y) = mu_1(c x, c y) = c^{-N-2s} mu_1(x, y).
  const double s = 0.4, c = 1.7;
  auto map = std::make_shared<AffineMap>(AffineMap::scaling(2, c));
  const Kernel k = Kernel::diffeo(map, std::make_shared<Kernel>(Kernel::mu(s, 2)));
  const Vec x = make_vec({0.1, 0.3}), y = make_vec({0.4, -0.2});
  CHECK(k(x, y) == doctest::Approx(std::pow(c, -2 - 2 * s) * mu1(x, y, s)).epsilon(1e-12));
  CHECK(k.polar(x, 0.0, make_vec({1.0, 0.0})) == doctest::Approx(std::pow(c, -2 - 2 * s)).epsilon(1e-12));
  CHECK(k.polar(x, 0.25, make_vec({0.0, 1.0})) == doctest::Approx(std::pow(c, -2 - 2 * s)).epsilon(1e-10));
}

TEST_CASE("frozen Jacobian density is even and elliptic") {
  Mat j = Mat::Identity(2, 2);
  j(1, 0) = 0.3;
  const AnisotropyDensity a = AnisotropyDensity::frozen_jacobian(j, 0.5);
  const auto chk = a.check(2);
  CHECK(chk.even_residual < 1e-14);
  CHECK(chk.ok);
  CHECK(a.ellipticity > 0.0);
  CHECK(a.ellipticity <= 1.0);
}

TEST_CASE("drift of a translation-invariant kernel vanishes") {
  const Kernel k = Kernel::mu(0.75, 1);
  CHECK(std::abs(drift_field(k, make_vec({0.3}))(0)) < 1e-14);
}

TEST_CASE("drift of a position-dependent kernel against its closed form") {
  // K = (1 + 0.1 min(1, |x| + |y|)) mu_1, s = 3/4, x = 0.3. The drift is
  // 0.1 int_0^inf (m(+y) - m(-y)) y^{-3/2} dy with m(y) = min(1, 0.3 + |0.3 + y|); the
  // difference is 2y on (0, 0.3), 0.6 on (0.3, 0.4), 1 - y on (0.4, 1) and 0 beyond.
  const double s = 0.75;
  const Kernel k = Kernel::general(
      s, 1, [s](const Vec& x, const Vec& y) { return (1 + 0.1 * std::min(1.0, std::abs(x(0)) + std::abs(y(0)))) * mu1(x, y, s); },
      1.0 + 2.0 * s, "piecewise drift test");
  const double oracle = 0.1 * (4.0 * std::sqrt(0.3) + 1.2 * (1.0 / std::sqrt(0.3) - 1.0 / std::sqrt(0.4)) +
                               2.0 * (1.0 / std::sqrt(0.4) - 1.0) - 2.0 * (1.0 - std::sqrt(0.4)));
  CHECK(oracle == doctest::Approx(0.2911602588).epsilon(1e-9));
  CHECK(drift_field(k, make_vec({0.3}))(0) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("kernel-class sampling") {
  const Kernel k = Kernel::mu(0.5, 2);
  const KernelClassReport r = verify_kernel_class(k, AnisotropyDensity{}, make_vec({0.0, 0.0}), 0.5, 500);
  CHECK(r.symmetry_residual == 0.0);
  CHECK(r.lambda_sup < 1e-14);
  CHECK(r.kappa_fit == doctest::Approx(1.0));

  const double s = 0.5;
  const Kernel asym = Kernel::general(
      s, 1, [s](const Vec& x, const Vec& y) { return mu1(x, y, s) * (1 + 0.5 * std::tanh(x(0) - y(0))); }, 2.0, "asym", 0.5);
  CHECK(verify_kernel_class(asym, AnisotropyDensity{}, make_vec({0.0}), 0.5, 500).symmetry_residual > 1e-3);
}

TEST_CASE("half-sphere rule integrates even functions") {
  // int_{S^1} cos^2 = pi, and the half-sphere sum counts half of it.
  double sum = 0.0;
  for (const Direction& d : half_sphere_rule(2, 64)) sum += d.weight * d.theta(0) * d.theta(0);
  CHECK(2.0 * sum == doctest::Approx(std::numbers::pi).epsilon(1e-12));
  CHECK(half_sphere_rule(1, 8).size() == 1);
}

TEST_CASE("anisotropy coercivity functional") {
  const CoercivityFunctional c = anisotropy_coercivity(AnisotropyDensity::cosine(0.5), 0.5, 2);
  CHECK(c.holds);
  CHECK(c.inf_value >= c.reference);
  const CoercivityFunctional one = anisotropy_coercivity(AnisotropyDensity{}, 0.5, 1);
  CHECK(one.inf_value == doctest::Approx(2.0));
}
