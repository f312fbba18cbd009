#pragma once

#include <string>
#include <vector>

#include "pivotsmt/config.hpp"

namespace pivotsmt::cli {

struct CommandSpec {
  std::string name;
  std::string help;
  std::vector<std::string> keys;      // accepted keys, also exposed as flags
  std::vector<std::string> required;  // keys without usable defaults
};

const std::vector<CommandSpec>& commands();
const CommandSpec* find_command(const std::string& name);

/// Runs one subcommand with a merged configuration. Throws pivotsmt::Error.
void run(const std::string& command, const PipelineConfig& config);

int exit_code(const std::exception& e);

struct ParsedCommand {
  std::string command;
  PipelineConfig config;  // config-file values overridden by flags
  bool help = false;      // help was printed; nothing to run
};

// Throws a usage Error on malformed arguments. `args` excludes the program name.
ParsedCommand parse_command_line(const std::vector<std::string>& args);

/// Parses argv (`--config FILE` values are overridden by flags), runs the
/// command and maps failures to exit codes: 2 usage, 3 config, 4 data, 5 internal.
int main_entry(int argc, char** argv);

}  // namespace pivotsmt::cli
