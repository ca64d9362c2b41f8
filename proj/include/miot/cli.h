#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace miot::cli {

/// Stable process exit codes.
enum ExitStatus : int {
  kSuccess = 0,
  kFindings = 1,
  kUsage = 2,
  kStorage = 3,
  kIntegrity = 4,
};

/// Runs `miot-gauge` with argv-style arguments (args[0] is the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace miot::cli
