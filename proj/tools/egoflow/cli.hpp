#pragma once

#include <ostream>

namespace egoflow::cli {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitEstimation = 3,
};

/// Entry point of the egoflow tool. Reports go to `out` as key=value lines,
/// diagnostics to `err` as a single line.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace egoflow::cli
