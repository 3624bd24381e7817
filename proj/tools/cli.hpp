#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tspbmc::cli {

enum ExitCode : int {
  kNoAttack = 0,
  kInputError = 2,
  kInconclusive = 3,
  kAttack = 10,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tspbmc::cli
