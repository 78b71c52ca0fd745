#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace evoplan {

enum ExitCode { exit_ok = 0, exit_error = 1, exit_infeasible = 2 };

/// Entry point of the evoplan command line; args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Worker count for parallel sweeps: EVOPLAN_THREADS if set and positive,
/// otherwise the hardware concurrency.
unsigned worker_threads();

}  // namespace evoplan
