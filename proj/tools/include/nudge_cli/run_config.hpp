#pragma once

// Run configuration for the command-line tool: parsing from YAML (or from a
// previously written JSON manifest), flag overrides and validation.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "nudge/experiments.hpp"
#include "nudge/interventions.hpp"
#include "nudge/user_model.hpp"

namespace nudge::cli {

/// A configuration problem. `where()` is "file:line:col" when known, and
/// `field()` is the dotted path of the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string where, std::string field, const std::string& msg)
      : std::invalid_argument(format(where, field, msg)), where_(std::move(where)), field_(std::move(field)) {}

  const std::string& where() const noexcept { return where_; }
  const std::string& field() const noexcept { return field_; }

 private:
  static std::string format(const std::string& where, const std::string& field, const std::string& msg) {
    std::string s = where.empty() ? std::string() : where + ": ";
    if (!field.empty()) s += field + ": ";
    return s + msg;
  }
  std::string where_;
  std::string field_;
};

struct ProfileConfig {
  // true: every delta at its cap for the planned user.
  bool maximal = true;
  double delta_b = 0.0;
  double delta_d = 0.0;
  double delta_gamma = 0.0;
  double delta_p = 0.0;
  std::optional<double> d_floor;
  std::optional<double> epsilon_b;

  friend bool operator==(const ProfileConfig&, const ProfileConfig&) = default;
};

struct SimulateConfig {
  int episodes = 10'000;
  int horizon = 10'000;
  int start_w = 1;
  // "planned" or a fixed intervention name (noop, B, D, gamma, p).
  std::string policy = "planned";

  friend bool operator==(const SimulateConfig&, const SimulateConfig&) = default;
};

struct RunConfig {
  WorldParams world{12, 0.6, 0.1, 0.0};
  std::string preset = "default";
  UserParams user{};  // preset values with explicit fields applied on top
  ProfileConfig profile{};
  double gamma_app = 0.99;
  std::uint64_t seed = 1;
  std::string out_dir = "out";
  std::vector<std::string> formats{"csv"};
  SimulateConfig simulate{};
  int trials = 20;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;

  UserPreset user_preset() const { return parse_preset(preset); }
  ExperimentConfig experiment() const;
  bool wants(const std::string& format) const;
};

/// Values given on the command line; each one replaces the file value.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::vector<std::string> formats;
  std::optional<std::string> preset;  // replaces the whole user block
  std::optional<int> n_states;
  std::optional<double> sigma2;
  std::optional<double> gamma_app;
  std::optional<int> episodes;
  std::optional<int> horizon;
  std::optional<std::string> policy;
  std::optional<int> trials;
};

/// Source position ("file:line:col") of every field read from a file,
/// keyed by dotted field path.
using Locations = std::map<std::string, std::string>;

struct ParsedConfig {
  RunConfig config;
  Locations locations;
};

/// Parse YAML text. A document with a top-level "manifest_version" key is
/// read as a manifest and its "config" member is used.
ParsedConfig parse_config(const std::string& text, const std::string& source = "<config>");
ParsedConfig load_config_file(const std::string& path);

/// Overridden fields lose their file location.
void apply_overrides(ParsedConfig& parsed, const Overrides& o);

/// Check every precondition the pipelines will rely on. Throws ConfigError,
/// located at the field's source position when `locations` knows it.
void validate_config(const RunConfig& cfg, const Locations& locations = {});

/// Fully resolved configuration, in the layout parse_config accepts.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

}  // namespace nudge::cli
