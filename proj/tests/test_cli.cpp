#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "nlreg/config.hpp"
#include "nlreg/report.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;
using namespace nlreg;

namespace {

const std::string kMinimal = R"(name: minimal
kernel: {family: mu_isotropic, s: 0.5, dim: 1}
domain: {shape: interval, a: -1, b: 1}
grid: {h: 1/64}
f: {family: constant, value: 1}
)";

std::string schema_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Schema);
    return e.what();
  }
  return "";
}

struct Run {
  int code;
  std::string out;
};

Run run(const std::string& args) {
  const fs::path log = fs::temp_directory_path() / "nlreg_cli_test.log";
  const int status = std::system((std::string(NLREG_BIN) + " " + args + " > " + log.string() + " 2>&1").c_str());
  std::ifstream is(log);
  std::stringstream ss;
  ss << is.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig c = parse_config(kMinimal);
  CHECK(c.name == "minimal");
  CHECK(c.h == doctest::Approx(1.0 / 64));
  CHECK(c.grid().size() == 129);
  CHECK(c.hash == fnv1a_hex(kMinimal));
  CHECK(c.kernel()->s() == 0.5);
}

TEST_CASE("schema errors name the line and field") {
  const std::string bad_beta = kMinimal.substr(0, kMinimal.find("f:")) + "f: {family: power, beta: 1.2}\n";
  const std::string msg = schema_message(bad_beta);
  CHECK(msg.find("line 5") != std::string::npos);
  CHECK(msg.find("f.beta") != std::string::npos);
  CHECK(schema_message(kMinimal + "colour: blue\n").find("unknown key") != std::string::npos);
  CHECK(schema_message(kMinimal + "solver: {tol: 1e-8, iters: 3}\n").find("solver.iters") != std::string::npos);
  CHECK(schema_message("name: x\nkernel: {family: mu_isotropic, s: 1.5, dim: 1}\n").find("kernel.s") != std::string::npos);
}

TEST_CASE("fnv1a is the reference 64-bit hash") {
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("reports are deterministic and sorted") {
  DiagnosticsReport r;
  r.title = "t";
  r.config_hash = "0";
  r.add({"b", Verdict::Fail, "property b", "second", {}});
  r.add({"a", Verdict::Pass, "property a", "first", {}});
  CHECK(r.overall() == Verdict::Fail);
  const std::string text = r.to_text();
  CHECK(text.find("a ") < text.find("b "));
  CHECK(text.find("violated: property b") != std::string::npos);
  CHECK(r.to_json().dump() == r.to_json().dump());
}

TEST_CASE("command line exit codes and artifacts") {
  const fs::path out = fs::temp_directory_path() / "nlreg_cli_out";
  fs::remove_all(out);
  const std::string cfg = std::string(NLREG_CONFIGS) + "/interval_torsion.yaml";

  const Run solve = run("solve --config " + cfg + " --out " + out.string());
  CHECK(solve.code == 0);
  CHECK(fs::exists(out / "interval_torsion_u.yaml"));
  CHECK(fs::exists(out / "interval_torsion_u.bin"));

  const std::string field = (out / "interval_torsion_u.yaml").string();
  CHECK(run("diagnose --config " + cfg + " --field " + field + " --out " + out.string()).code == 0);
  const std::string first = slurp(out / "interval_torsion_report.json");
  CHECK(run("diagnose --config " + cfg + " --field " + field + " --out " + out.string()).code == 0);
  CHECK(slurp(out / "interval_torsion_report.json") == first);
  CHECK(fs::exists(out / "interval_torsion_report_p00_boundary_growth.csv"));

  CHECK(run("solve --config " + std::string(NLREG_CONFIGS) + "/bad_beta.yaml --out " + out.string()).code == 2);
  CHECK(run("diagnose --config " + std::string(NLREG_CONFIGS) + "/liouville_affine.yaml --field " + field).code == 4);
  CHECK(run("verify nonsense").code == 2);
}

TEST_CASE("verify reports a broken kernel symmetry") {
  const Run r = run("verify liouville --config " + std::string(NLREG_CONFIGS) + "/asymmetric.yaml");
  CHECK(r.code == 1);
  CHECK(r.out.find("[violated: kernel symmetry K(x, y) = K(y, x)]") != std::string::npos);
  CHECK(r.out.find("AC-6 PASS") != std::string::npos);
}

TEST_CASE("verify identities passes") {
  const Run r = run("verify identities");
  CHECK(r.code == 0);
  for (const char* id : {"AC-1 PASS", "AC-4 PASS", "AC-8 PASS", "AC-9 PASS", "AC-10 PASS"})
    CHECK(r.out.find(id) != std::string::npos);
}

TEST_CASE("boundary acceptance config runs end to end") {
  const fs::path out = fs::temp_directory_path() / "nlreg_cli_ac2";
  fs::remove_all(out);
  const std::string cfg = std::string(NLREG_CONFIGS) + "/ac2_s050.yaml";
  CHECK(run("solve --config " + cfg + " --out " + out.string()).code == 0);
  CHECK(run("diagnose --config " + cfg + " --field " + (out / "ac2_s050_u.yaml").string() + " --out " + out.string()).code == 0);
  const Json rep = Json::parse(slurp(out / "ac2_s050_report.json"));
  CHECK(rep.dump().find("p00_boundary_growth") != std::string::npos);
  const std::string text = slurp(out / "ac2_s050_report.txt");
  CHECK(text.find("overall PASS") != std::string::npos);
}
