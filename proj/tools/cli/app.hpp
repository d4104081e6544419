#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bss::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 2;
inline constexpr int kExitMissing = 3;
inline constexpr int kExitInternal = 4;

/// Runs one subcommand. `args` excludes the program name. Returns the exit
/// code; messages go to `out` and `err`.
int run(std::vector<std::string> const& args, std::ostream& out,
        std::ostream& err);

}  // namespace bss::cli
