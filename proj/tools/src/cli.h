#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agraph::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,  // bad arguments or I/O failure
  kParse = 2,
  kMismatch = 3,
};

// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agraph::cli
