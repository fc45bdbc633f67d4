// Subcommands of the cbir tool, callable in-process for testing.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbir::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cbir::cli
