#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlreg/funcspace.hpp"

#include <cmath>
#include <numbers>

using namespace nlreg;

namespace {

Grid line(double lo, double hi, double h) { return Grid::cover(make_vec({lo}), make_vec({hi}), h); }

}  // namespace

TEST_CASE("cutoff equals one on B_R and vanishes outside B_2R") {
  const Cutoff c{0.5, make_vec({0.0})};
  CHECK(c(make_vec({0.4})) == 1.0);
  CHECK(c(make_vec({1.0})) == 0.0);
  CHECK(c(make_vec({0.75})) > 0.0);
  CHECK(c(make_vec({0.75})) < 1.0);
}

TEST_CASE("omega_s branches") {
  CHECK(omega_s(0.25, 0.25, 1) == doctest::Approx(std::pow(0.25, -0.5)));
  CHECK(omega_s(0.25, 0.5, 1) == doctest::Approx(-std::log(0.25)));
  CHECK(omega_s(0.9, 0.5, 1) == 1.0);
  CHECK(omega_s(0.25, 0.75, 1) == 1.0);
}

TEST_CASE("Morrey norm of model sources") {
  const std::vector<Vec> centers{make_vec({0.0}), make_vec({0.3}), make_vec({-0.7})};
  const std::vector<double> radii{1.0 / 64, 1.0 / 16, 0.25, 1.0};
  // r^{beta - N} int_{B_r} |f|
  const ScalarSource one{[](const Vec&) { return 1.0; }, {}};
  CHECK(morrey_norm(one, 1, 0.0, 0.5, centers, radii) == doctest::Approx(2.0).epsilon(1e-8));
  const ScalarSource sing{[](const Vec& x) { return std::pow(std::abs(x(0)), -0.5); }, {make_vec({0.0})}};
  CHECK(morrey_norm(sing, 1, 0.5, 0.5, centers, radii) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("Kato modulus of a power potential") {
  // V = |x|^{-1/2}, s = 0.4, N = 1: omega = t^{-0.2} and the sup sits at the singularity,
  // int_{-r}^{r} |y|^{-0.7} dy = 2 r^{0.3} / 0.3.
  const ScalarSource v{[](const Vec& x) { return std::pow(std::abs(x(0)), -0.5); }, {make_vec({0.0})}};
  const std::vector<Vec> centers{make_vec({0.0}), make_vec({0.2}), make_vec({-0.5})};
  for (double r : {0.01, 0.1, 0.5})
    CHECK(kato_modulus(v, r, 0.4, 1, centers) == doctest::Approx(2.0 * std::pow(r, 0.3) / 0.3).epsilon(1e-6));
}

TEST_CASE("log-log fit") {
  std::vector<double> x, y;
  for (int k = 0; k < 8; ++k) {
    x.push_back(std::pow(2.0, -k));
    y.push_back(3.0 * std::pow(x.back(), 1.7));
  }
  const LogLogFit f = fit_loglog(x, y);
  CHECK(f.slope == doctest::Approx(1.7).epsilon(1e-12));
  CHECK(std::exp(f.intercept) == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.decades == doctest::Approx(7 * std::log10(2.0)));
  try {
    fit_loglog({1.0, 0.5, 0.25}, {1.0, 2.0, 3.0});
    FAIL("expected FitIllConditioned");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::FitIllConditioned);
  }
}

TEST_CASE("weighted L^1 tail norm") {
  // u = 1 everywhere: int 1 / (1 + x^2) = pi at s = 1/2.
  const Grid g = line(-4.0, 4.0, 1.0 / 256);
  const DiscreteField one = DiscreteField::sample(g, [](const Vec&) { return 1.0; }, FarField::power(0.0, 1.0));
  CHECK(l1s_norm(one, 0.5) == doctest::Approx(std::numbers::pi).epsilon(1e-5));
  // u = max(x, 0)^{1/2}, s = 3/4: int_0^inf x^{1/2} / (1 + x^{5/2}) = (pi / 2.5) / sin(0.6 pi).
  const DiscreteField half = DiscreteField::sample(g, [](const Vec& x) { return std::sqrt(positive_part(x(0))); },
                                                   FarField::function([](const Vec& x) { return std::sqrt(positive_part(x(0))); },
                                                                      0.5, "sqrt"));
  CHECK(l1s_norm(half, 0.75) == doctest::Approx((std::numbers::pi / 2.5) / std::sin(0.6 * std::numbers::pi)).epsilon(2e-4));
  try {
    l1s_norm(DiscreteField::sample(g, [](const Vec&) { return 1.0; }, FarField::power(1.0)), 0.5);
    FAIL("expected DivergentTail");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::DivergentTail);
  }
}

TEST_CASE("discrete H^s seminorm of a linear function") {
  // int_0^1 int_0^1 |x - y|^{2 - 1 - 2s} = 2 / ((2 - 2s)(3 - 2s)) at s = 1/4.
  const Grid g = line(0.0, 1.0, 1.0 / 512);
  const DiscreteField u = DiscreteField::sample(g, [](const Vec& x) { return x(0); });
  const Region r{make_vec({0.0}), make_vec({1.0})};
  CHECK(hs_seminorm(u, r, 0.25) == doctest::Approx(std::sqrt(2.0 / (1.5 * 2.5))).epsilon(1e-3));
}

TEST_CASE("Holder exponent fits") {
  const Grid g = line(-1.0, 1.0, 1.0 / 1024);
  const Region r{make_vec({-0.5}), make_vec({0.5})};
  std::vector<double> scales;
  for (int k = 3; k <= 8; ++k) scales.push_back(std::pow(2.0, -k));
  const HolderFit root = fit_holder(DiscreteField::sample(g, [](const Vec& x) { return std::sqrt(std::abs(x(0))); }), r, scales);
  CHECK(root.exponent == doctest::Approx(0.5).epsilon(0.02));
  CHECK_FALSE(root.lipschitz_or_better);
  const HolderFit linear = fit_holder(DiscreteField::sample(g, [](const Vec& x) { return 2.0 * x(0); }), r, scales);
  CHECK(linear.lipschitz_or_better);
  CHECK(linear.label().find("C^{0,1}") != std::string::npos);
  // x |x|^{1/2} is C^{1,1/2}.
  const HolderFit c15 = fit_holder(DiscreteField::sample(g, [](const Vec& x) { return x(0) * std::sqrt(std::abs(x(0))); }), r, scales);
  CHECK(c15.exponent == doctest::Approx(1.5).epsilon(0.06));
  CHECK(c15.label().find("C^{1,") != std::string::npos);
}

TEST_CASE("scalar class tags") {
  const ScalarSource sing{[](const Vec& x) { return std::pow(std::abs(x(0)), -0.5); }, {make_vec({0.0})}};
  const std::vector<Vec> centers{make_vec({0.0}), make_vec({0.4})};
  const std::vector<double> radii{1.0 / 64, 1.0 / 16, 0.25};
  CHECK(classify(sing, 1, 0.5, 0.5, centers, radii).valid());
  try {
    classify(sing, 1, 1.2, 0.5, centers, radii);
    FAIL("expected BadExponent");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::BadExponent);
  }
}
