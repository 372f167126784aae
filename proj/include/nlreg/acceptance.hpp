// Acceptance criteria AC-1 ... AC-10 as runnable checks, grouped into verification suites.
#pragma once

#include <string>
#include <vector>

namespace nlreg {

struct CriterionResult {
  std::string id;
  bool pass = false;
  std::string title;
  std::string measured;
  std::string property;              ///< printed on FAIL lines
  std::vector<std::string> details;  ///< one line per sub-check
};

/// "AC-1" ... "AC-10".
std::vector<std::string> all_criteria();
/// identities | growth | boundary | liouville | all.
std::vector<std::string> suite_criteria(const std::string& suite);
CriterionResult run_criterion(const std::string& id);
/// "AC-n PASS|FAIL title: measured" plus "violated: property" on failure.
std::string format_result(const CriterionResult& r);

}  // namespace nlreg
