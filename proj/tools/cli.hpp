#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace platelab::cli {

enum ExitCode : int { ok = 0, usage = 1, not_converged = 2, check_failed = 3 };

/// Runs `plate-lab <args...>` (args exclude the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace platelab::cli
