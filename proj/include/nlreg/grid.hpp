// Uniform Cartesian grids, nodal fields with a far-field model, and their on-disk format.
#pragma once

#include "nlreg/core.hpp"

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <string>
#include <vector>

namespace nlreg {

class Grid {
 public:
  Grid() = default;
  Grid(int dim, std::vector<int> extents, Vec lo, double h);
  /// Smallest grid with spacing h whose nodes span [lo, hi] (hi rounded to the lattice).
  static Grid cover(const Vec& lo, const Vec& hi, double h);

  int dim() const { return dim_; }
  double h() const { return h_; }
  const std::vector<int>& extents() const { return extents_; }
  int extent(int axis) const { return extents_[axis]; }
  const Vec& lo() const { return lo_; }
  Vec hi() const;
  std::size_t size() const { return size_; }

  /// Flat index of a multi-index (axis 0 fastest).
  std::size_t flat(const std::array<int, kMaxDim>& idx) const;
  std::array<int, kMaxDim> multi(std::size_t flat) const;
  Vec node(std::size_t flat) const;
  Vec node(const std::array<int, kMaxDim>& idx) const;
  bool contains(const Vec& x, double slack = 0.0) const;

  bool same_layout(const Grid& other) const;
  std::string describe() const;

 private:
  int dim_ = 0;
  std::vector<int> extents_;
  Vec lo_;
  double h_ = 0.0;
  std::size_t size_ = 0;
};

/// Values outside the grid box.
struct FarField {
  enum class Kind { Zero, PowerDecay, Function };
  Kind kind = Kind::Zero;
  double exponent = 0.0;   ///< |u(x)| grows like |x|^exponent (PowerDecay, Function)
  double amplitude = 1.0;  ///< PowerDecay: u(x) = amplitude |x|^exponent
  ScalarFn fn;             ///< Function: exact exterior values
  std::string name = "zero";

  static FarField zero() { return {}; }
  static FarField power(double exponent, double amplitude = 1.0);
  static FarField function(ScalarFn fn, double growth_exponent, std::string name);

  double operator()(const Vec& x) const;
  /// Growth exponent relevant for tail integrals (-inf for Zero).
  double growth() const;
};

class DiscreteField {
 public:
  DiscreteField() = default;
  DiscreteField(Grid grid, Eigen::VectorXd values, FarField far = {});
  static DiscreteField sample(const Grid& grid, const ScalarFn& f, FarField far = {});

  const Grid& grid() const { return grid_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }
  const FarField& far_field() const { return far_; }
  void set_far_field(FarField far) { far_ = std::move(far); }
  double operator[](std::size_t i) const { return values_[static_cast<Eigen::Index>(i)]; }

  /// Multilinear interpolation inside the box, far-field model outside.
  double value(const Vec& x) const;
  ScalarFn as_function() const;

 private:
  Grid grid_;
  Eigen::VectorXd values_;
  FarField far_;
};

/// Writes `<stem>.yaml` (header) and `<stem>.bin` (little-endian float64, axis 0 fastest).
void write_field(const DiscreteField& field, const std::filesystem::path& stem);
/// Reads a field from its header path. Function far-fields come back with an empty callable.
DiscreteField read_field(const std::filesystem::path& header);

}  // namespace nlreg
