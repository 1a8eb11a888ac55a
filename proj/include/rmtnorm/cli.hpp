#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rmtnorm::cli {

enum ExitCode : int {
    kOk = 0,
    kValidationError = 1,
    kNumericalError = 2,
    kVerifyFailed = 3,
};

/// Runs one CLI invocation. `args` excludes the program name. Data goes to `out` (or to the
/// --out target), diagnostics to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rmtnorm::cli
