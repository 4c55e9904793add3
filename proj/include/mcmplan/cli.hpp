#pragma once

#include <ostream>

namespace mcmplan::cli {

/// Exit codes: 0 converged or succeeded, 2 finished without converging,
/// 1 error (diagnostic on err).
enum ExitCode : int { kOk = 0, kError = 1, kNotConverged = 2 };

/// Runs one command line (argv[0] is the program name). Human-readable text
/// goes to out, diagnostics to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace mcmplan::cli
