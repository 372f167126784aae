// Small shared vocabulary: points, matrices, scalar fields and the library error type.
#pragma once

#include <Eigen/Dense>

#include <functional>
#include <initializer_list>
#include <stdexcept>
#include <string>

namespace nlreg {

inline constexpr int kMaxDim = 3;

/// Point or vector in R^N, N <= 3, stored inline (no heap traffic in hot loops).
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
/// Small dense matrix, at most 3x3.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

inline Vec make_vec(std::initializer_list<double> values) {
  Vec v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

inline Vec unit_vec(int dim, int axis) {
  Vec v = Vec::Zero(dim);
  v(axis) = 1.0;
  return v;
}

using ScalarFn = std::function<double(const Vec&)>;

enum class Errc {
  InvalidArgument,
  DiagonalPoint,
  NoZeroLimit,
  NonconvergentPV,
  InsufficientRegularity,
  BadExponent,
  FitIllConditioned,
  DivergentTail,
  SupportEscape,
  Origin,
  ScaleTooLarge,
  NotPositiveDefinite,
  MaxIterExceeded,
  OutOfMemory,
  RadiusEscapesDomain,
  DegenerateDenominator,
  StripTooThin,
  EmptyField,
  GridMismatch,
  Schema,
  Io,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

inline double positive_part(double x) { return x > 0.0 ? x : 0.0; }

}  // namespace nlreg
