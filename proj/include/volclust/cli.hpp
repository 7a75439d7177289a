#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volclust::cli {

enum ExitCode : int { ok = 0, config_error = 2, numerical_error = 3 };

/// Runs one command line (without the program name). Data goes to files
/// named by --out, or to `out` when there is none; diagnostics go to `err`
/// as a single line.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace volclust::cli
