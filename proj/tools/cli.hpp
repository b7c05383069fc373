#pragma once

#include <ostream>

namespace wstl::cli {

/// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsageError = 1;  // bad arguments or unparseable formula
inline constexpr int kDataError = 2;   // unreadable data, model or training failure
inline constexpr int kCheckFailed = 3;

/// Runs the command line; all output goes to `out` and `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wstl::cli
