#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace genreg::cli {

enum ExitCode : int { kOk = 0, kRegistrationFailed = 1, kUsage = 2 };

/// Entry point for the `genreg` tool. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace genreg::cli
