#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace mpgrade {

inline constexpr const char* kConfigEnv = "MPGRADE_CONFIG";

// Runs one command line (args[0] is the program name). Returns the exit code:
// 0 success, 1 runtime failure, 2 config or validation error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mpgrade
