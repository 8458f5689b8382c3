#pragma once

#include <iosfwd>

namespace cssplc::cli {

enum ExitCode : int { kOk = 0, kValidation = 1, kRuntime = 2 };

/// Entire command-line program; main() forwards here so tests can drive it
/// in-process.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace cssplc::cli
