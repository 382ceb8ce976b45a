#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "kinex/core.hpp"
#include "kinex/stats.hpp"

namespace kinex {

struct Snapshot {
  std::size_t sweep = 0;
  Histogram histogram;
};

struct AlphaPoint {
  std::size_t sweep = 0;
  double alpha_hat = 0.0;
};

struct RunResult {
  std::size_t n_units = 0;
  std::vector<double> final_wealth;
  /// Post-equilibration snapshots, one every snapshot_interval sweeps.
  std::vector<Snapshot> snapshots;
  /// Wealths of all post-equilibration snapshots, snapshot after snapshot.
  std::vector<double> samples;
  /// Sum of the snapshot histograms.
  Histogram histogram;
  /// Shape estimate of every snapshot over the whole run, equilibration included.
  std::vector<AlphaPoint> alpha_trace;
  std::uint64_t trades_attempted = 0;
  std::uint64_t trades_accepted = 0;
  /// |final total - expected total| / expected total.
  double conservation_drift = 0.0;
  /// Sweep after which the shape estimate settled, or the configured
  /// equilibration budget when it never did.
  std::size_t equilibration_sweep = 0;
  bool equilibrated = false;
};

/// N attempted trades per sweep; a rejected trade still counts.
RunResult run(const SimConfig& config);

/// Samples of the snapshots whose sweep index is a multiple of `every`.
std::vector<double> thinned_samples(const RunResult& result, std::size_t every);

struct EquilibrationEstimate {
  std::size_t index = 0;  // position in the trace
  std::size_t sweep = 0;
  bool converged = false;
};

/// First trace position i at which the mean shape over [i, i + w) and over
/// [i + w, i + 2w) differ by less than `tolerance` relative. w is shrunk to
/// half the trace when the trace is short. Falls back to `fallback_sweep`.
EquilibrationEstimate detect_equilibration(std::span<const AlphaPoint> trace,
                                           std::size_t fallback_sweep, std::size_t window = 10,
                                           double tolerance = 0.01);

struct EnsembleResult {
  std::vector<RunResult> replicas;
  std::vector<FitReport> fits;
  Histogram histogram;
  std::vector<double> samples;
  double alpha_mean = 0.0;
  /// Standard deviation of the per-replica estimates.
  double alpha_spread = 0.0;
  /// alpha_spread / sqrt(replicas).
  double alpha_pooled_stderr = 0.0;
};

/// Replica r runs with seed + r. Replicas run concurrently, each owning its
/// population and stream.
EnsembleResult run_ensemble(const SimConfig& config, std::size_t n_replicas, FitRange range = {});

struct ProductionConsumptionResult {
  double growth_rate = 0.0;  // p - c per sweep
  RunResult raw;
  /// Raw samples and final wealths multiplied by exp[-(p - c) t].
  std::vector<double> rescaled_samples;
  std::vector<double> rescaled_final;
  /// Conservative run driven by the same seed.
  RunResult conserved;
  double raw_total_final = 0.0;
};

/// Every sweep of exchanges is followed by a homogeneous growth step
/// x -> x exp(p - c).
ProductionConsumptionResult run_production_consumption(const SimConfig& config, double p, double c);

}  // namespace kinex
