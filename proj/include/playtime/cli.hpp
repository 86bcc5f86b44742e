#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace playtime::cli {

/// Exit codes shared by every command.
enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,  // also malformed command lines
  kInputError = 3,
  kDegenerateData = 4,
};

/// Runs one command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace playtime::cli
