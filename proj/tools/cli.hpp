#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace substan::cli {

enum ExitCode : int { kOk = 0, kUsageError = 1, kDataError = 2, kRuntimeError = 3 };

// args excludes the program name. Messages go to out/err; artifacts go to
// the run directory of the subcommand.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace substan::cli
