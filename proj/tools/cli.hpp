#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace nfsrd::cli {

// Exit codes: 0 success, 2 usage or data error, 1 internal error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Runs the command line `args` (args[0] is the program name) and returns
// the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nfsrd::cli
