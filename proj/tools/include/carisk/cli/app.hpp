#pragma once

#include <ostream>

namespace carisk::cli {

enum ExitCode : int {
    kSuccess = 0,
    kValidationError = 1,
    kVerificationFailure = 2,
    kDegenerateInstance = 3,
};

/// Entry point of the `carisk` command line tool, with the streams
/// injectable for testing.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace carisk::cli
