#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "nudge_cli/run_config.hpp"

namespace nudge::cli {

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitNumerical = 3, kExitPattern = 4 };

struct OutputFile {
  std::string name;
  std::string content;
};

struct CommandResult {
  std::vector<OutputFile> files;  // manifest.json is added by execute()
  nlohmann::ordered_json verdicts = nlohmann::ordered_json::object();
  bool pattern_failed = false;
  std::string summary;  // printed to standard output
};

const std::vector<std::string>& command_names();

/// Run a pipeline fully in memory. Throws on invalid input or numerical
/// failure; nothing touches the file system.
CommandResult run_command(const std::string& command, const RunConfig& cfg);

nlohmann::ordered_json make_manifest(const std::string& command, const RunConfig& cfg, const CommandResult& result);

/// Validate, run, and write every output plus manifest.json into the output
/// directory. Returns the process exit code; diagnostics go to `err`.
int execute(const std::string& command, const ParsedConfig& parsed, std::ostream& out, std::ostream& err);

}  // namespace nudge::cli
