// Runs acceptance checks A1-A15 and prints one line per check.
// Arguments select a subset by id; exit status is 1 when any check fails.

#include <algorithm>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "spde/acceptance.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> ids(argv + 1, argv + argc);
  spde::acceptance::Options opt;
  int failed = 0;
  for (const auto& check : spde::acceptance::all_checks()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), check.id) == ids.end()) continue;
    const auto r = spde::acceptance::run_check(check, opt);
    failed += r.passed ? 0 : 1;
    std::cout << (r.passed ? "PASS " : "FAIL ") << std::left << std::setw(4) << r.id << " " << r.title << " ["
              << std::fixed << std::setprecision(2) << r.seconds << " s] " << r.detail << std::endl;
  }
  std::cout << (failed == 0 ? "all checks passed" : std::to_string(failed) + " check(s) failed") << std::endl;
  return failed == 0 ? 0 : 1;
}
