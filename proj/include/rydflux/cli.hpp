#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rydflux/config.hpp"

namespace rydflux {

inline constexpr int kSchemaVersion = 1;

enum ExitCode { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitCapacity = 4 };

/// Runs one subcommand with a parsed config, writing artifacts and
/// manifest.json into config.output_dir. Errors propagate as exceptions.
void run_command(const std::string& command, const RunConfig& config, std::ostream& log);

/// Full command line entry: `rydflux <command> <config.json> [-o dir]`.
/// Maps exceptions to exit codes.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

const std::vector<std::string>& commands();

}  // namespace rydflux
