#pragma once

#include <string>
#include <vector>

namespace dcnn {

/// Command-line entry point (subcommands: node-class, graph-class,
/// learning-curve, hop-sweep, stats). Returns the process exit code; on
/// failure a one-line JSON error record goes to stderr.
int run_cli(int argc, const char* const* argv);

/// Test-friendly overload; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args);

}  // namespace dcnn
