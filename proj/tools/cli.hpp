#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gstate::cli {

enum ExitCode { kPass = 0, kOther = 1, kValidation = 2, kNonconvergence = 3, kIdentityFailure = 4 };

/// Run the command line (args excludes the program name). Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gstate::cli
