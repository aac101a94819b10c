#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gapflow {

enum ExitCode : int { kExitOk = 0, kExitInternal = 1, kExitInvariant = 2, kExitConfig = 3 };

/// Runs one CLI command. `args` excludes the program name. Output goes to
/// `out` unless --out names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gapflow
