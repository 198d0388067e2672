#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace bpre {

// Runs the command line `args` (args[0] is the program name). Returns the
// process exit status: 0 success, 1 usage, 2 config parse, 3 simulation,
// 4 statistics, 5 io, 6 config validation, 7 invalid argument.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace bpre
