#pragma once
#include <iosfwd>
#include <string>
#include <vector>

namespace fsi {

struct CriterionResult {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured numbers, one line
  double seconds = 0;
};

// The nine release gates, run in order. `log` gets one [PASS]/[FAIL] line per
// gate as it finishes, so long sweeps show progress. A gate that throws is
// reported as failed with the exception text; the remaining gates still run.
std::vector<CriterionResult> run_acceptance(std::ostream& log);

bool all_passed(const std::vector<CriterionResult>& rs);

}  // namespace fsi
