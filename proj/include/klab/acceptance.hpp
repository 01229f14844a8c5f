#pragma once

#include <string>
#include <vector>

namespace klab::acceptance {

// One acceptance criterion: a named check with a hard wall-clock budget.
// passed reflects the checks alone; within_budget the timing; a criterion
// only counts as green when both hold.
struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  double seconds = 0.0;
  double budget_seconds = 0.0;
  bool within_budget = false;
  std::string detail;  // what was verified, or the first failures
};

struct SuiteReport {
  std::string suite;  // "fast" or "full"
  std::vector<CriterionResult> results;
  bool all_passed = false;
};

// Runs the acceptance criteria. suite is "fast" (skips the curve-mass
// integration criterion) or "full" (everything). Each criterion is timed
// and exception-isolated: a throw fails that criterion and is reported in
// its detail string.
SuiteReport run_suite(const std::string& suite);

// Machine-readable verdict.
std::string report_json(const SuiteReport& r);

}  // namespace klab::acceptance
