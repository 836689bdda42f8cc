#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace drunk::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kConfig = 2,
  kRuntime = 3,
};

/// Runs the `drunk` command line. args[0] is the program name. Data goes to
/// `out` (or the --out file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace drunk::cli
