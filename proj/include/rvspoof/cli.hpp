// Command-line entry point: subcommand dispatch, file formats, exit codes.
// Exit convention: 0 success, 1 domain failure, 2 usage or parse failure.
#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rvspoof {

// Runs one CLI invocation (args exclude the program name). Output and
// diagnostics go to the provided streams so tests can drive commands
// in-process exactly as the binary does.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rvspoof
