#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hmn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Entry point for `hmn <gen-data|train|evaluate|generate|chat> [flags]`.
/// args excludes the program name. Returns the process exit code.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace hmn::cli
