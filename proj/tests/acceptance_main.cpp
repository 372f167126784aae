// Runs every acceptance criterion and prints one PASS/FAIL line each.
#include "nlreg/acceptance.hpp"

#include <fmt/format.h>

#include <cstdio>

int main() {
  bool all = true;
  for (const auto& id : nlreg::all_criteria()) {
    const nlreg::CriterionResult r = nlreg::run_criterion(id);
    all &= r.pass;
    fmt::print("{}\n", nlreg::format_result(r));
    for (const auto& d : r.details) fmt::print("    {}\n", d);
    std::fflush(stdout);
  }
  return all ? 0 : 1;
}
