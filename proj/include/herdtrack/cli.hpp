#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace herdtrack::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kDataError = 3, kInternal = 4 };

/// Full command-line entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace herdtrack::cli
