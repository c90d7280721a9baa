#pragma once

namespace infonoise {

// Parses and runs one subcommand. Returns the process exit code:
// 0 success, 2 configuration error, 3 data error, 4 numerical/degenerate.
int run_cli(int argc, const char* const* argv);

}  // namespace infonoise
