#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace freqbin {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitData = 3 };

/// Runs the command line (arguments without the program name). Reports go
/// to `out` unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

std::string version();

}  // namespace freqbin
