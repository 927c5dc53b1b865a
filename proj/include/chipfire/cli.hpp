#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace chipfire::cli {

/// Full command-line surface, callable in-process for testing. `args` is the
/// argument list without the program name. Returns the process exit code:
/// 0 success, 1 usage, 2 parse/validation, 3 budget exhausted, 4 structural
/// (loops, disconnection, size limits, convergence failures).
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace chipfire::cli
