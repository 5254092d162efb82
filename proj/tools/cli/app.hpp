#pragma once

#include <string>
#include <vector>

namespace bubbletower::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitBlowup = 2,
  kExitHypothesis = 3,
  kExitUsage = 64,
};

// Subcommands: simulate, diagnose, select-times, decompose, verify, sweep.
// `--config <file>` reads key = value lines; a [section] applies to the
// subcommand of that name. Flags given on the command line win.
int run(int argc, char** argv);
int run(const std::vector<std::string>& args);

}  // namespace bubbletower::cli
