#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace defsim {

// Entry point behind the `defsim` binary. `args` excludes the program name.
// Exit codes: 0 success, 1 runtime failure, 2 bad arguments.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace defsim
