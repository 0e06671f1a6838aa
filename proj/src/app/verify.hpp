#pragma once

// Self-check suite behind `ionlag verify`. Every check draws its cases from
// one seeded generator, so a (level, seed) pair always gives the same report.

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace ionlag::app {

struct CheckResult {
  std::string name;
  bool passed = false;
  int cases = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::string level;
  std::uint64_t seed = 0;
  std::vector<CheckResult> checks;

  bool passed() const;
};

/// level is "fast" or "full"; throws UsageError otherwise.
VerifyReport run_verify(const std::string& level, std::uint64_t seed);

/// One line per check, then a JSON object on the last line.
void print_report(std::ostream& os, const VerifyReport& r);

}  // namespace ionlag::app
