#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lobswitch {

/// Exit statuses of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    kExitRuntime = 1,
    kExitMissingFile = 2,
    kExitBadConfig = 3,
    kExitValidation = 4,
    kExitUsage = 64,
};

/// Runs the tool with argv-style arguments (args[0] is the program name).
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

const char* version_string();

}  // namespace lobswitch
