#pragma once

#include <iostream>
#include <string>
#include <vector>

namespace tts {

/// Exit codes of tts-lab.
enum ExitCode : int { exit_ok = 0, exit_fail = 1, exit_usage = 2 };

/// Entry point of the tts-lab command line. Subcommands: validate, theory,
/// run, montecarlo, decompose, report. Diagnostics go to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
             std::ostream& err = std::cerr);

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tts
