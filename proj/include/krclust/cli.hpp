#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace krclust::cli {

/// Exit codes: 0 success, 1 user error (bad flags, bad input, infeasible
/// configuration), 2 internal error.
int dispatch(int argc, char** argv);

/// Testable entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace krclust::cli
