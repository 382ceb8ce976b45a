#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "kinex/stats.hpp"

namespace kinex {

/// Raised for any invalid parameter or configuration value. The message
/// names the offending key.
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a function is evaluated outside its mathematical domain.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised when a running simulation reaches an unusable state.
class SimulationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Deterministic pseudo-random stream.
///
/// Draws are produced from the raw 64-bit engine output with explicit bit
/// manipulation, so the sequence does not depend on the standard library's
/// distribution implementations.
class RngStream {
public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  /// Uniform in [0, 1).
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1].
  double uniform_open_closed() noexcept { return 1.0 - uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n) noexcept;

  std::uint64_t next_u64() noexcept { return engine_(); }

private:
  std::mt19937_64 engine_;
};

enum class RuleKind { Immediate, DYReshuffle, CCSaving, AngleUnidirectional, AngleSaving, Mixed };

struct ExchangeRule {
  RuleKind kind = RuleKind::Immediate;
  double lambda = 0.0;  // saving propensity, CCSaving / AngleSaving
  double mu = 0.0;      // unidirectional fraction, Mixed
  double p0 = 0.5;      // P(transfer from j), Angle rules
};

enum class CriterionKind {
  Always,
  LinearAbsolute,
  ExponentialAbsolute,
  LinearRelative,
  AsymmetricRich,
  HeterogeneousLinear
};

struct AcceptanceCriterion {
  CriterionKind kind = CriterionKind::Always;
  double eta = 1.0;    // acceptance scale
  double dx0 = 0.0;    // threshold shift, ExponentialAbsolute
  double theta = 0.0;  // rich-favouring rejection fraction, AsymmetricRich
};

/// eta_i i.i.d. uniform in (min, max).
struct UniformEta {
  double min = 0.1;
  double max = 0.1;
};

/// floor(fraction_major * n) units at eta_major, the rest uniform in
/// (minor_min, minor_max).
struct TwoClassEta {
  double fraction_major = 0.95;
  double eta_major = 2.0;
  double minor_min = 0.5;
  double minor_max = 0.7;
};

using EtaDistributionSpec = std::variant<UniformEta, TwoClassEta>;

struct SimConfig {
  std::size_t n_units = 1000;
  std::size_t n_sweeps = 10000;
  ExchangeRule rule{};
  AcceptanceCriterion criterion{};
  std::uint64_t seed = 1;
  std::size_t equilibration_sweeps = 1000;
  double mean_wealth = 1.0;
  /// Sweeps between recorded snapshots.
  std::size_t snapshot_interval = 10;
  /// Per-unit eta recipe; required by HeterogeneousLinear.
  std::optional<EtaDistributionSpec> eta_spec;
  /// Binning of the per-snapshot histograms.
  HistogramSpec histogram{};
  /// Equilibration detector: window length in snapshots and relative tolerance.
  std::size_t equilibration_window = 10;
  double equilibration_tolerance = 0.01;
};

/// Throws ConfigError naming the first invalid field.
void validate(const SimConfig& config);
void validate(const ExchangeRule& rule);
void validate(const AcceptanceCriterion& criterion);

struct Population {
  std::vector<double> wealth;
  /// Per-unit acceptance scales; empty unless the criterion is heterogeneous.
  std::vector<double> eta;
  /// Reference total. Constant under conservative dynamics; the
  /// production-consumption driver rescales it together with the wealths.
  double total_wealth_initial = 0.0;

  std::size_t size() const noexcept { return wealth.size(); }
  double mean_wealth() const noexcept {
    return total_wealth_initial / static_cast<double>(wealth.size());
  }
  double total() const noexcept;
};

Population init_population(const SimConfig& config);

/// Ordered pair of distinct units, uniform over all n(n-1) ordered pairs.
std::pair<std::size_t, std::size_t> draw_pair(RngStream& rng, std::size_t n);

}  // namespace kinex
