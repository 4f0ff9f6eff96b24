// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. The same checks back `dimerlab verify`.

#include <cstdio>
#include <vector>

#include "dimerlab/verification.hpp"

int main() {
  const std::vector<dimerlab::CriterionResult> results = dimerlab::run_acceptance();
  int failures = 0;
  for (const auto& r : results) {
    std::printf("[%s] %-24s expected %-14.8g actual %-14.8g tol %-10.3g %s\n",
                r.pass ? "PASS" : "FAIL", r.id.c_str(), r.expected, r.actual, r.tolerance,
                r.description.c_str());
    if (!r.pass) ++failures;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures,
              results.size());
  return failures == 0 ? 0 : 1;
}
