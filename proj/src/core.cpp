#include "nlreg/core.hpp"
#include "nlreg/quadrature.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numbers>

namespace nlreg {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::DiagonalPoint: return "DiagonalPoint";
    case Errc::NoZeroLimit: return "NoZeroLimit";
    case Errc::NonconvergentPV: return "NonconvergentPV";
    case Errc::InsufficientRegularity: return "InsufficientRegularity";
    case Errc::BadExponent: return "BadExponent";
    case Errc::FitIllConditioned: return "FitIllConditioned";
    case Errc::DivergentTail: return "DivergentTail";
    case Errc::SupportEscape: return "SupportEscape";
    case Errc::Origin: return "Origin";
    case Errc::ScaleTooLarge: return "ScaleTooLarge";
    case Errc::NotPositiveDefinite: return "NotPositiveDefinite";
    case Errc::MaxIterExceeded: return "MaxIterExceeded";
    case Errc::OutOfMemory: return "OutOfMemory";
    case Errc::RadiusEscapesDomain: return "RadiusEscapesDomain";
    case Errc::DegenerateDenominator: return "DegenerateDenominator";
    case Errc::StripTooThin: return "StripTooThin";
    case Errc::EmptyField: return "EmptyField";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::Schema: return "Schema";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

namespace quad {

namespace {

Rule compute_gauss_legendre(int n) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

const Rule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, compute_gauss_legendre(n)).first;
  return it->second;
}

std::vector<double> graded_breaks(double a, double b, double first, double max_width) {
  std::vector<double> breaks{a};
  double width = std::min(first, max_width);
  double x = a;
  while (x < b) {
    x = std::min(b, x + width);
    breaks.push_back(x);
    width = std::min(2.0 * width, max_width);
  }
  return breaks;
}

}  // namespace quad
}  // namespace nlreg
