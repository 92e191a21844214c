#pragma once

#include <string>
#include <vector>

namespace duoloop {

/// Parse command-line arguments (program name excluded) and run the
/// selected subcommand.  Returns the process exit code: 0 on success, 1 on
/// runtime failures (solver, fits, I/O, failed reference comparison), 2 on
/// configuration problems (bad invocation, unreadable or invalid config).
int parse_and_dispatch(const std::vector<std::string>& args);

}  // namespace duoloop
