#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volcheck::cli {

/// Exit codes of `run`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolated = 2;
inline constexpr int kExitHypothesisNotMet = 3;

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace volcheck::cli
