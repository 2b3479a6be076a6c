#pragma once

#include <iosfwd>

namespace mfsp::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,      ///< bad flags or missing required parameters
  kData = 2,       ///< unreadable or invalid input data
  kNumerical = 3,  ///< numerical breakdown during a computation
};

/// Runs one CLI invocation. argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mfsp::cli
