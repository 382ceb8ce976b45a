#include "kinex/core.hpp"

#include <cmath>
#include <numeric>

#include "kinex/acceptance.hpp"

namespace kinex {

namespace {

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key + ": " + what);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  engine_.seed(seq);
}

std::size_t RngStream::index(std::size_t n) noexcept {
  // Lemire's multiply-shift with rejection; unbiased for every n.
  const auto range = static_cast<std::uint64_t>(n);
  unsigned __int128 m = static_cast<unsigned __int128>(engine_()) * range;
  auto low = static_cast<std::uint64_t>(m);
  if (low < range) {
    const std::uint64_t threshold = (0 - range) % range;
    while (low < threshold) {
      m = static_cast<unsigned __int128>(engine_()) * range;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::size_t>(m >> 64);
}

void validate(const ExchangeRule& rule) {
  switch (rule.kind) {
    case RuleKind::CCSaving:
    case RuleKind::AngleSaving:
      require(rule.lambda >= 0.0 && rule.lambda < 1.0, "lambda", "must lie in [0, 1)");
      break;
    case RuleKind::Mixed:
      require(rule.mu >= 0.0 && rule.mu <= 1.0, "mu", "must lie in [0, 1]");
      break;
    default:
      break;
  }
  if (rule.kind == RuleKind::AngleUnidirectional || rule.kind == RuleKind::AngleSaving) {
    require(rule.p0 >= 0.0 && rule.p0 <= 1.0, "p0", "must lie in [0, 1]");
  }
}

void validate(const AcceptanceCriterion& c) {
  switch (c.kind) {
    case CriterionKind::LinearAbsolute:
    case CriterionKind::ExponentialAbsolute:
    case CriterionKind::LinearRelative:
      require(c.eta > 0.0 && std::isfinite(c.eta), "eta", "must be positive");
      break;
    case CriterionKind::AsymmetricRich:
      require(c.theta >= 0.0 && c.theta <= 1.0, "theta", "must lie in [0, 1]");
      break;
    default:
      break;
  }
  if (c.kind == CriterionKind::ExponentialAbsolute) {
    require(std::isfinite(c.dx0), "dx0", "must be finite");
  }
}

void validate(const SimConfig& config) {
  require(config.n_units >= 2, "n", "need at least 2 units");
  require(config.n_sweeps > 0, "sweeps", "must be positive");
  require(config.n_sweeps > config.equilibration_sweeps, "equilibration",
          "must be smaller than sweeps");
  require(config.mean_wealth > 0.0 && std::isfinite(config.mean_wealth), "mean_wealth",
          "must be positive");
  require(config.snapshot_interval > 0, "snapshot_interval", "must be positive");
  validate(config.rule);
  validate(config.criterion);
  if (config.criterion.kind == CriterionKind::HeterogeneousLinear) {
    require(config.eta_spec.has_value(), "eta_spec",
            "hetero-linear criterion needs --eta-min/--eta-max or --two-class");
    validate(*config.eta_spec);
  }
}

double Population::total() const noexcept {
  return std::accumulate(wealth.begin(), wealth.end(), 0.0);
}

Population init_population(const SimConfig& config) {
  require(config.n_units >= 2, "n", "need at least 2 units");
  require(config.mean_wealth > 0.0 && std::isfinite(config.mean_wealth), "mean_wealth",
          "must be positive");
  Population pop;
  pop.wealth.assign(config.n_units, config.mean_wealth);
  pop.total_wealth_initial = config.mean_wealth * static_cast<double>(config.n_units);
  if (config.criterion.kind == CriterionKind::HeterogeneousLinear) {
    require(config.eta_spec.has_value(), "eta_spec", "missing for hetero-linear criterion");
    // Separate stream so the eta assignment never shifts the trade sequence.
    RngStream eta_rng(config.seed, 1);
    pop.eta = assign_heterogeneous_eta(*config.eta_spec, config.n_units, eta_rng);
  }
  return pop;
}

std::pair<std::size_t, std::size_t> draw_pair(RngStream& rng, std::size_t n) {
  if (n < 2) throw ConfigError("n: draw_pair needs at least 2 units");
  const std::size_t j = rng.index(n);
  std::size_t k = rng.index(n - 1);
  if (k >= j) ++k;
  return {j, k};
}

}  // namespace kinex
