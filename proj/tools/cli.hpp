#ifndef LIPTREE_TOOLS_CLI_HPP
#define LIPTREE_TOOLS_CLI_HPP

#include <iosfwd>

namespace liptree::cli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInvalidParams = 2;

/// Runs the liptree command line. Regular output goes to out unless --out
/// names a file; diagnostics go to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace liptree::cli

#endif  // LIPTREE_TOOLS_CLI_HPP
