#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace far {

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitValidation = 1, kExitRuntime = 2 };

/// Runs one command. args[0] is the program name. Usage problems and invalid
/// inputs return 1 (with help on err), numerical failures return 2.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_dispatch(int argc, const char* const* argv);

}  // namespace far
