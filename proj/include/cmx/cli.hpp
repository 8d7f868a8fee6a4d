#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cmx {

inline constexpr const char *version = "0.1.0";

/// Exit codes of the command-line front end.
enum ExitCode : int { exit_ok = 0, exit_runtime = 1, exit_config = 2 };

/// Shortest decimal text that parses back to the same double; locale-free.
std::string format_real(double value);

/// Runs the `cmx` command line with `args` (program name excluded).
int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

} // namespace cmx
