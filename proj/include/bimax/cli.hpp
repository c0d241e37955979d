#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bimax {

enum ExitCode { kExitOk = 0, kExitUsage = 1, kExitBudget = 2 };

/// Subcommands gen, solve and report. args excludes the program name.
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace bimax
