#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace oritrans {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitViolated = 1,
  kExitInvalid = 2,
  kExitBudget = 3,
  kExitInconclusive = 4,
};

// Runs one command (solve, verify, convert, relax). `args` excludes the
// program name. Result JSON goes to `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oritrans
