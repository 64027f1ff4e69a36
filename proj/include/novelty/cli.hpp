#pragma once

#include <iosfwd>

namespace novelty {

// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,       // bad arguments, invalid config, or a solve that cannot proceed
    kExitInfeasible = 2,  // existence condition fails; feasibility.json is written
    kExitOracle = 3,      // solve-dt --oracle disagrees beyond 1e-5 or fails to converge
};

// Entry point behind the executable, callable in-process.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace novelty
