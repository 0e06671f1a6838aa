#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ionlag::app {

/// Exit codes of the command-line front end.
enum ExitCode : int { kOk = 0, kVerifyFailed = 1, kUsage = 2, kNonConverged = 3 };

/// Runs `ionlag <args...>` (args excludes the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ionlag::app
