#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pdeconv::cli {

/// Runs the command line `args` (args[0] is the program name).
/// Returns 0 on success or convergence, 2 when a solve hit the iteration cap,
/// 1 on usage or runtime errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace pdeconv::cli
