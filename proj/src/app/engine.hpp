#pragma once

// Expands a RunConfig into grid jobs, evaluates them on a thread pool and
// collects rows in job order, so output never depends on scheduling.

#include <cstddef>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "settings.hpp"

namespace ionlag::app {

struct Job {
  std::size_t index = 0;
  PointSpec spec;
  QuenchSpec quench = QuenchSpec::carrier();
  ReducedParams rp;
  TruncationPolicy policy;
};

/// Row order: panel, axis, axis2, branch, m. Carrier points reached from
/// several branches are evaluated once.
std::vector<Job> expand_jobs(const RunConfig& rc);

/// Calls fn(i) for i in [0, n) on `threads` workers. Exceptions are
/// rethrown on the caller, lowest index first.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn);

using Cell = std::variant<std::monostate, double, long, bool, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct LagRun {
  Table table;
  std::vector<LagResult> results;
  bool any_nonconverged = false;
};

LagRun run_lag(const RunConfig& rc);
Table run_moments(const RunConfig& rc);
Table run_spectrum(const RunConfig& rc);

}  // namespace ionlag::app
