#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace harm::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvalidInput = 2,
  kNotIdentified = 3,
  kVerificationFailed = 4,
};

/// Runs one invocation; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace harm::cli
