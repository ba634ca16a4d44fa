// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace logicopt {

/// Command-line front end: solve, bench, verify, dump-cnf. Returns the
/// process exit code (0 = success / certified feasible point found).
int run_cli(const std::vector<std::string>& args);

}  // namespace logicopt
