#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tremor::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitEstimation = 4;

// Runs the command line `args` (without the program name). Diagnostics go
// to `err`, data only to files.
int run(const std::vector<std::string>& args, std::ostream& err);

}  // namespace tremor::cli
