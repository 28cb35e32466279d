#pragma once

#include <ostream>

namespace ruleforge {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitFormat = 2,     // unreadable, malformed, or invalid input
  kExitRejected = 3,   // refinement exhausted, or nothing to refine
};

// Subcommands: sim | eval | cf | refine | metrics | check. Inputs are all
// loaded and validated before any file is written.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ruleforge
