#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qseries::cli {

// Runs the command line `args` (without the program name). Returns the exit
// code: 0 pass, 1 mathematical failure, 2 usage, precondition or
// convergence error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace qseries::cli
