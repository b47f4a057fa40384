#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace arkan::cli {

/// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // numeric or internal failure
inline constexpr int kExitUsage = 2;    // bad flags or input files

/// Runs the command line `args` (without the program name).
/// Reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Routes spdlog to stderr at the level named by ARKAN_LOG (error, info, debug; default info).
void configure_logging();

}  // namespace arkan::cli
