#pragma once

#include <iosfwd>

namespace pcc {

// Exit codes of the command-line front end.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // data, numerical or I/O failure
inline constexpr int kExitUsage = 2;    // bad flags or inconsistent inputs

// Runs one command (fit, simulate, bootstrap, efficiency, gaussian-oracle).
// Normal output goes to `out`, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pcc
