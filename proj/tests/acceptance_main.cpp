// Runs the full acceptance gate and reports one line per criterion.
// Exit status is nonzero if any criterion fails.

#include <cstdio>
#include <iostream>

#include "fsi/acceptance.hpp"

int main() {
  std::cout << "acceptance gate: 9 criteria\n";
  std::vector<fsi::CriterionResult> rs = fsi::run_acceptance(std::cout);
  int npass = 0;
  for (const auto& r : rs) npass += r.pass ? 1 : 0;
  std::cout << npass << "/" << rs.size() << " criteria passed\n";
  return fsi::all_passed(rs) ? 0 : 1;
}
