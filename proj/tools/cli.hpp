#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aptforge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitSolver = 3;

inline constexpr const char* kCsvHeader = "env,strategy,lambda,epsilon,objective,cost,score,phi";

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Directory holding bundled environment configs: $APT_FORGE_DATA if set, else the
/// build-time data directory.
std::string data_dir();

}  // namespace aptforge::cli
