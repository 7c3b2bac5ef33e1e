#ifndef WAVEDEFORM_CLI_RUNNER_HPP
#define WAVEDEFORM_CLI_RUNNER_HPP

#include <ostream>

namespace wavedeform::cli {

enum ExitCode : int { kOk = 0, kUsage = 2, kData = 3, kNumerical = 4 };

// Entry point shared by the executable and the tests. argv[0] is the program
// name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace wavedeform::cli

#endif  // WAVEDEFORM_CLI_RUNNER_HPP
