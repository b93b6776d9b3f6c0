#pragma once

#include <ostream>

namespace rek::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kInputError = 1;
inline constexpr int kNotConverged = 2;  // solve hit the iteration cap
inline constexpr int kCheckFailed = 2;   // verify found a failing check

/// Runs the `rek` command line with gen, solve, bench and verify
/// subcommands. Normal output goes to `out`, diagnostics and log lines
/// to `err`.
int runCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rek::cli
