#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinex/core.hpp"

namespace kinex {

/// Everything one invocation of the command-line tool asks for.
struct CliRequest {
  SimConfig config;
  std::size_t replicas = 4;
  std::filesystem::path out_dir;
  std::optional<std::string> preset;
  bool list_presets = false;
  bool help = false;
  std::string help_text;
  /// Production and consumption rates per sweep; set together.
  std::optional<double> production;
  std::optional<double> consumption;
  /// Lower edge of the Gamma fit; 0 means the full range.
  double fit_min = 0.0;
  /// Hill estimator on this upper fraction when set.
  std::optional<double> tail_fraction;
};

/// Names accepted as config-file keys and as `--key` flags.
const std::vector<std::string>& config_keys();

/// Builds a request from flat settings (keys in dash form). Unknown keys,
/// malformed values, out-of-range values, missing required parameters and
/// parameters the chosen rule or criterion does not use all raise
/// ConfigError naming the key.
CliRequest request_from_settings(const std::map<std::string, std::string>& settings);

/// argv without the program name. `--config FILE` is read first; flags
/// given on the command line override its values.
CliRequest parse_config(const std::vector<std::string>& args);

/// $KINEX_OUT_DIR when set and non-empty, otherwise ./kinex-out.
std::filesystem::path default_output_dir();

/// Text written next to every output set: time unit, tail convention,
/// the configuration that produced it.
std::string run_metadata(const SimConfig& config, std::size_t replicas);

std::string to_string(RuleKind kind);
std::string to_string(CriterionKind kind);

}  // namespace kinex
