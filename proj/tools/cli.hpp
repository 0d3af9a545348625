#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace courtside::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kRuntimeError = 1;
inline constexpr int kValidationError = 2;

/// Runs the `courtside` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace courtside::cli
