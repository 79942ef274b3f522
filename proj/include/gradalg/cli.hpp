#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gradalg {

// Exit statuses of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

/// Runs one `gat` subcommand; `args` excludes the program name. The report is
/// written to `out` in one piece, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gradalg
