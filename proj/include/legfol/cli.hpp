#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace legfol::cli {

enum ExitCode : int { kPass = 0, kFailure = 1, kUsage = 2 };

/// Runs the command line (args[0] is the program name). Reports go to out,
/// diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace legfol::cli
