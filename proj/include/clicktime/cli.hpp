#pragma once

#include <string>
#include <vector>

namespace clicktime {

// Batch front end. Subcommands: phase-shifts | povm-check | density | delay.
// Returns the process exit code: 0 ok, 2 config validation failure,
// 3 numerical failure (or low captured mass), 4 invariant/route failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace clicktime
