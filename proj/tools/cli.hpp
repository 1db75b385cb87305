#pragma once

#include <iosfwd>

namespace ellipvol::cli {

/// Dispatches the command line and writes results to out / diagnostics to err.
/// Exit codes: 0 success, 1 usage or domain error (including infeasible
/// inversion targets), 2 violated verification contract, 3 numerical
/// non-convergence.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ellipvol::cli
