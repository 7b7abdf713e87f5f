#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace clr::cli {

enum ExitCode : int { ok = 0, usage = 1, data_error = 2, numeric_failure = 3 };

/// Entry point for the clrimpute tool. Subcommands: synth, split, train, tune,
/// evaluate, impute. Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace clr::cli
