// nlreg: solve configured experiments, run their diagnostics, and verify the acceptance suites.
//
// Exit codes: 0 success, 1 verification failure, 2 config/schema error, 3 solver failure,
// 4 field/grid mismatch.

#include "nlreg/acceptance.hpp"
#include "nlreg/config.hpp"
#include "nlreg/kernels.hpp"
#include "nlreg/report.hpp"
#include "nlreg/solver.hpp"

#include "CLI11.hpp"

#include <fmt/format.h>

#include <filesystem>
#include <fstream>
#include <iostream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fs = std::filesystem;
using namespace nlreg;

namespace {

void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

ExperimentConfig load_or_exit(const fs::path& path, const std::string& seed) {
  try {
    ExperimentConfig cfg = load_config(path);
    if (!seed.empty()) cfg.seed = std::stoull(seed, nullptr, 16);
    return cfg;
  } catch (const Error& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    std::exit(2);
  } catch (const std::exception& e) {
    fmt::print(stderr, "config error: bad --seed: {}\n", e.what());
    std::exit(2);
  }
}

int cmd_solve(const fs::path& config, const std::string& out_dir, const std::string& seed) {
  const ExperimentConfig cfg = load_or_exit(config, seed);
  const fs::path out = out_dir.empty() ? cfg.output : fs::path(out_dir);
  try {
    const DirichletProblem problem = cfg.problem();
    const StiffnessSystem sys = assemble(problem);
    const SolveResult res = solve(sys, cfg.solver);
    fs::create_directories(out);
    write_field(res.u, out / (cfg.name + "_u"));
    Json log;
    log["config"] = cfg.name;
    log["config_hash"] = cfg.hash;
    log["kernel"] = problem.kernel->describe();
    log["domain"] = problem.domain.describe();
    log["grid"] = problem.grid.describe();
    log["unknowns"] = sys.active.size();
    log["iterations"] = res.iterations;
    log["relative_residual"] = res.residual;
    log["galerkin_residual"] = galerkin_residual(sys, res.u);
    log["tail_error"] = sys.op.tail_error;
    std::ofstream(out / (cfg.name + "_solve.json"), std::ios::binary) << log.dump(2) << '\n';
    fmt::print("solved {}: {} unknowns, {} CG iterations, residual {:.2e}\nfield {}\n", cfg.name, sys.active.size(),
               res.iterations, res.residual, (out / (cfg.name + "_u.yaml")).string());
    return 0;
  } catch (const Error& e) {
    fmt::print(stderr, "solver failure: {}\n", e.what());
    return 3;
  }
}

int cmd_diagnose(const fs::path& config, const fs::path& field_path, const std::string& out_dir, const std::string& seed) {
  const ExperimentConfig cfg = load_or_exit(config, seed);
  const fs::path out = out_dir.empty() ? cfg.output : fs::path(out_dir);
  DiscreteField u;
  try {
    u = read_field(field_path);
  } catch (const Error& e) {
    fmt::print(stderr, "field error: {}\n", e.what());
    return e.code() == Errc::GridMismatch ? 4 : 2;
  }
  if (!u.grid().same_layout(cfg.grid())) {
    fmt::print(stderr, "grid mismatch: field has {}, config has {}\n", u.grid().describe(), cfg.grid().describe());
    return 4;
  }
  u.set_far_field(cfg.exterior_field());
  try {
    const DiagnosticsReport rep = run_probes(cfg, u);
    rep.write(out, cfg.name + "_report");
    fmt::print("{}", rep.to_text());
    return 0;
  } catch (const Error& e) {
    fmt::print(stderr, "diagnostics failure: {}\n", e.what());
    return e.code() == Errc::GridMismatch ? 4 : 3;
  }
}

int cmd_verify(const std::string& suite, const std::string& config, const std::string& seed) {
  std::vector<std::string> ids;
  try {
    ids = suite_criteria(suite);
  } catch (const Error& e) {
    fmt::print(stderr, "{}\n", e.what());
    return 2;
  }
  bool all_pass = true;
  std::vector<std::pair<std::string, std::string>> table;
  if (!config.empty()) {
    // Kernel invariants of the configured kernel come first: every criterion assumes them.
    const ExperimentConfig cfg = load_or_exit(config, seed);
    const auto k = cfg.kernel();
    const Vec center = Vec::Zero(cfg.dim);
    const KernelClassReport kr = verify_kernel_class(*k, AnisotropyDensity{}, center, 0.5, 1000, cfg.seed);
    const bool sym = kr.symmetry_residual <= 1e-12;
    all_pass &= sym;
    table.emplace_back("kernel", sym ? "PASS" : "FAIL");
    fmt::print("kernel {} {}: symmetry residual {:.3e}{}\n", sym ? "PASS" : "FAIL", k->describe(), kr.symmetry_residual,
               sym ? "" : " [violated: kernel symmetry K(x, y) = K(y, x)]");
  }
  for (const std::string& id : ids) {
    const CriterionResult r = run_criterion(id);
    all_pass &= r.pass;
    table.emplace_back(id, r.pass ? "PASS" : "FAIL");
    fmt::print("{}\n", format_result(r));
    for (const auto& d : r.details) fmt::print("    {}\n", d);
    std::fflush(stdout);
  }
  fmt::print("\nsummary ({})\n", suite);
  for (const auto& [id, v] : table) fmt::print("  {:<8} {}\n", id, v);
  fmt::print("{}\n", all_pass ? "all PASS" : "FAIL");
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal regularity toolkit: solve, diagnose, verify"};
  app.require_subcommand(1);
  int threads = 0;
  std::string seed;
  app.add_option("--threads", threads, "worker threads (0: runtime default)");
  app.add_option("--seed", seed, "seed override, hexadecimal");

  std::string config, field, out;
  auto* solve_cmd = app.add_subcommand("solve", "assemble and solve the configured problem");
  solve_cmd->add_option("--config", config, "experiment YAML")->required();
  solve_cmd->add_option("--out", out, "output directory (default from config)");
  solve_cmd->add_option("--threads", threads, "worker threads");
  solve_cmd->add_option("--seed", seed, "seed override, hexadecimal");

  auto* diag_cmd = app.add_subcommand("diagnose", "run the configured probes on a solution field");
  diag_cmd->add_option("--config", config, "experiment YAML")->required();
  diag_cmd->add_option("--field", field, "field header written by solve")->required();
  diag_cmd->add_option("--out", out, "output directory (default from config)");
  diag_cmd->add_option("--threads", threads, "worker threads");
  diag_cmd->add_option("--seed", seed, "seed override, hexadecimal");

  std::string suite;
  auto* verify_cmd = app.add_subcommand("verify", "run an acceptance suite");
  verify_cmd->add_option("suite", suite, "identities | growth | boundary | liouville | all")->required();
  verify_cmd->add_option("--config", config, "also check the kernel invariants of this experiment");
  verify_cmd->add_option("--threads", threads, "worker threads");
  verify_cmd->add_option("--seed", seed, "seed override, hexadecimal");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }
  set_threads(threads);
  if (*solve_cmd) return cmd_solve(config, out, seed);
  if (*diag_cmd) return cmd_diagnose(config, field, out, seed);
  return cmd_verify(suite, config, seed);
}
