// Experiment configuration: one YAML file describes kernel, domain, data, grid and probe plan.
#pragma once

#include "nlreg/diagnostics.hpp"
#include "nlreg/report.hpp"
#include "nlreg/solver.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace nlreg {

struct SourceSpec {
  std::string family = "zero";  ///< zero | constant | power
  double value = 0.0;           ///< constant
  double amplitude = 1.0;       ///< power: amplitude |x - center|^{-beta}
  double beta = 0.0;
  Vec center;
  std::optional<double> morrey_beta;  ///< declared Morrey class, validated against 2s
  ScalarSource build(int dim) const;
};

struct ProbeSpec {
  std::string kind;  ///< interior_growth | boundary_growth | quotient | caccioppoli | liouville | q_curve | morrey
  std::vector<Vec> centers;
  std::vector<double> radii;
  std::optional<double> predicted;
  double width = 1.0;     ///< quotient strip width
  double R = 0.5;         ///< caccioppoli cutoff radius
  std::string target;     ///< liouville: affine | halfspace
};

struct ExperimentConfig {
  std::filesystem::path file;
  std::filesystem::path base_dir;
  std::string text;
  std::string hash;
  std::string name;
  std::uint64_t seed = 0x5EED;
  std::filesystem::path output;

  std::string kernel_family = "mu_isotropic";
  double s = 0.5;
  int dim = 1;
  double anisotropy = 0.0;  ///< mu_anisotropic: cosine amplitude; perturbed: lambda amplitude
  double rho = 0.25;        ///< flattening scale

  std::string domain_shape = "interval";
  Vec domain_lo, domain_hi;   ///< interval / box
  Vec ball_center;
  double ball_radius = 1.0;
  double curvature = 1.0;     ///< parabola
  std::optional<double> regularity_radius;

  double h = 1.0 / 256.0;
  Vec grid_lo, grid_hi;

  SourceSpec f, V;
  bool has_V = false;
  std::string exterior = "zero";  ///< zero | affine | halfspace_profile
  Vec exterior_slope;
  double exterior_offset = 0.0;

  SolveOptions solver;
  std::vector<ProbeSpec> probes;

  std::shared_ptr<const Kernel> kernel() const;
  Domain domain() const;
  Grid grid() const;
  FarField exterior_field() const;
  DirichletProblem problem() const;
};

/// Parses and validates a config file; Schema errors name the line and the field.
ExperimentConfig load_config(const std::filesystem::path& file);
ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = ".");

/// Runs the configured probes on a solution.
DiagnosticsReport run_probes(const ExperimentConfig& cfg, const DiscreteField& u);

}  // namespace nlreg
