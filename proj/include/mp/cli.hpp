#pragma once

#include <string>
#include <vector>

namespace mp {

/// Command-line entry point (args exclude the program name).
/// Exit codes: 0 success, 2 usage error, 3 data error, 4 no consensus.
/// Failures emit a one-line JSON object {"error": ..., "message": ...} on
/// stderr.
int run_cli(const std::vector<std::string>& args);

}  // namespace mp
