#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mep {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 2,
    kExitNumerical = 3,
};

/// Runs the CLI with `args` (args[0] is the program name). CSV goes to `out`
/// unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mep
