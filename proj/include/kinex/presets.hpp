#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kinex/core.hpp"
#include "kinex/engine.hpp"
#include "kinex/stats.hpp"

namespace kinex {

/// Empirical mass below this wealth is reported for every case.
inline constexpr double kLowWealth = 0.05;

struct TargetCheck {
  std::string name;
  double value = 0.0;
  std::string expectation;
  bool passed = false;
};

/// One simulated configuration inside a preset.
struct ExperimentCase {
  ExperimentCase() = default;
  ExperimentCase(std::string label_, SimConfig config_)
      : label(std::move(label_)), config(std::move(config_)) {}

  std::string label;
  SimConfig config;
  FitRange fit_range{};
  /// Snapshots used by the KS tests are this many sweeps apart.
  std::size_t ks_stride = 1000;
  std::optional<double> tail_fraction;
};

struct CaseResult {
  std::string label;
  SimConfig config;  // seed of replica 0
  std::size_t replicas = 0;
  /// Log-binned density of all post-equilibration snapshots.
  Histogram histogram;
  /// Shape from all pooled samples; KS fields from `ks_samples`.
  FitReport fit;
  /// Snapshots ks_stride sweeps apart, all replicas.
  std::vector<double> ks_samples;
  double mode = 0.0;
  double low_mass = 0.0;  // empirical fraction below kLowWealth
  double alpha_spread = 0.0;
  double acceptance_rate = 0.0;
  double max_conservation_drift = 0.0;
  bool equilibrated = false;
};

struct PresetResult {
  std::string name;
  std::vector<CaseResult> cases;
  std::vector<TargetCheck> checks;
  /// Extra output files, name -> content.
  std::map<std::string, std::string> files;

  bool passed() const;
  const CaseResult& at(const std::string& label) const;
};

struct PresetOptions {
  std::optional<std::size_t> replicas;
  std::optional<std::uint64_t> seed;
};

struct ExperimentPreset {
  std::string name;
  std::string description;
  std::vector<ExperimentCase> cases;
  /// Computes the targets from the finished cases.
  std::function<void(PresetResult&)> evaluate;
  /// Replaces the case loop when set.
  std::function<void(PresetResult&, std::size_t replicas, std::uint64_t seed)> custom;
};

const std::vector<ExperimentPreset>& presets();
const ExperimentPreset& find_preset(const std::string& name);  // ConfigError lists names

/// Case i runs replicas with seeds seed + 1000 i, seed + 1000 i + 1, ...
CaseResult run_case(const ExperimentCase& spec, std::size_t replicas, std::uint64_t seed);

PresetResult run_preset(const std::string& name, const PresetOptions& options = {});

/// <dir>/<label>.csv, <label>.fit.txt and <label>.meta.txt per case, plus
/// fits.jsonl, checks.txt and the preset's extra files.
void write_preset(const PresetResult& result, const std::filesystem::path& dir);

std::string format_check(const TargetCheck& check);

}  // namespace kinex
