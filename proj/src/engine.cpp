#include "kinex/engine.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <future>
#include <numeric>
#include <sstream>
#include <thread>

#include "kinex/acceptance.hpp"
#include "kinex/rules.hpp"

namespace kinex {

namespace {

void commit(Population& pop, const TradeProposal& t) {
  double& xj = pop.wealth[t.j];
  double& xk = pop.wealth[t.k];
  double new_j = xj + t.delta;
  double new_k = xk - t.delta;
  // Rounding can leave a loser at -1 ulp; hand the residue back.
  if (new_j < 0.0) {
    new_k += new_j;
    new_j = 0.0;
  } else if (new_k < 0.0) {
    new_j += new_k;
    new_k = 0.0;
  }
  if (!std::isfinite(new_j) || !std::isfinite(new_k)) {
    std::ostringstream msg;
    msg << "non-finite wealth after trade (" << t.j << ", " << t.k << "): x_j=" << xj
        << " x_k=" << xk << " delta=" << t.delta;
    throw SimulationError(msg.str());
  }
  xj = new_j;
  xk = new_k;
}

/// Shared driver. growth == 1 gives the conservative dynamics.
RunResult simulate(const SimConfig& config, double growth_per_sweep) {
  validate(config);
  Population pop = init_population(config);
  RngStream rng(config.seed);
  const std::size_t n = pop.size();
  const double expected_initial = pop.total_wealth_initial;

  RunResult result;
  result.n_units = n;
  result.histogram = make_histogram(config.histogram);
  const std::size_t post = config.n_sweeps - config.equilibration_sweeps;
  result.samples.reserve(post / config.snapshot_interval * n);

  for (std::size_t sweep = 1; sweep <= config.n_sweeps; ++sweep) {
    for (std::size_t t = 0; t < n; ++t) {
      const auto [j, k] = draw_pair(rng, n);
      const TradeProposal proposal = propose(config.rule, pop, j, k, rng);
      ++result.trades_attempted;
      if (decide_trade(proposal, pop, config.criterion, rng)) {
        commit(pop, proposal);
        ++result.trades_accepted;
      }
    }
    if (growth_per_sweep != 1.0) {
      for (double& x : pop.wealth) x *= growth_per_sweep;
      pop.total_wealth_initial *= growth_per_sweep;
    }
    if (sweep % config.snapshot_interval != 0) continue;
    result.alpha_trace.push_back({sweep, mle_shape(pop.wealth)});
    if (sweep <= config.equilibration_sweeps) continue;
    Snapshot snap{sweep, make_histogram(config.histogram, pop.wealth)};
    merge(result.histogram, snap.histogram);
    result.snapshots.push_back(std::move(snap));
    result.samples.insert(result.samples.end(), pop.wealth.begin(), pop.wealth.end());
  }

  const double expected = growth_per_sweep == 1.0
                              ? expected_initial
                              : expected_initial * std::pow(growth_per_sweep,
                                                            static_cast<double>(config.n_sweeps));
  result.conservation_drift = std::abs(pop.total() - expected) / expected;
  result.final_wealth = std::move(pop.wealth);

  const auto eq = detect_equilibration(result.alpha_trace, config.equilibration_sweeps,
                                       config.equilibration_window,
                                       config.equilibration_tolerance);
  result.equilibration_sweep = eq.sweep;
  result.equilibrated = eq.converged;
  return result;
}

}  // namespace

RunResult run(const SimConfig& config) { return simulate(config, 1.0); }

std::vector<double> thinned_samples(const RunResult& result, std::size_t every) {
  if (every == 0) throw ConfigError("thinning interval must be positive");
  std::vector<double> out;
  for (std::size_t s = 0; s < result.snapshots.size(); ++s) {
    if (result.snapshots[s].sweep % every != 0) continue;
    const auto first = result.samples.begin() + static_cast<std::ptrdiff_t>(s * result.n_units);
    out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(result.n_units));
  }
  return out;
}

EquilibrationEstimate detect_equilibration(std::span<const AlphaPoint> trace,
                                           std::size_t fallback_sweep, std::size_t window,
                                           double tolerance) {
  EquilibrationEstimate est;
  est.sweep = fallback_sweep;
  if (trace.size() < 2 || window == 0) return est;
  const std::size_t w = std::min(window, trace.size() / 2);
  auto block_mean = [&](std::size_t from) {
    double s = 0.0;
    for (std::size_t i = from; i < from + w; ++i) s += trace[i].alpha_hat;
    return s / static_cast<double>(w);
  };
  for (std::size_t i = 0; i + 2 * w <= trace.size(); ++i) {
    const double a = block_mean(i);
    const double b = block_mean(i + w);
    if (std::abs(b - a) <= tolerance * std::abs(a)) {
      est.index = i;
      est.sweep = trace[i].sweep;
      est.converged = true;
      return est;
    }
  }
  return est;
}

EnsembleResult run_ensemble(const SimConfig& config, std::size_t n_replicas, FitRange range) {
  if (n_replicas < 1) throw ConfigError("replicas: must be at least 1");
  validate(config);
  EnsembleResult out;
  out.replicas.resize(n_replicas);
  out.fits.resize(n_replicas);

  auto work = [&](std::size_t r) {
    SimConfig c = config;
    c.seed = config.seed + r;
    out.replicas[r] = run(c);
    out.fits[r] = fit_gamma(out.replicas[r].samples, range);
  };
  const std::size_t threads =
      std::max<std::size_t>(1, std::min<std::size_t>(n_replicas, std::thread::hardware_concurrency()));
  for (std::size_t start = 0; start < n_replicas; start += threads) {
    std::vector<std::future<void>> batch;
    for (std::size_t r = start; r < std::min(n_replicas, start + threads); ++r)
      batch.push_back(std::async(std::launch::async, work, r));
    for (auto& f : batch) f.get();
  }

  out.histogram = make_histogram(config.histogram);
  for (const auto& rep : out.replicas) {
    merge(out.histogram, rep.histogram);
    out.samples.insert(out.samples.end(), rep.samples.begin(), rep.samples.end());
  }
  std::vector<double> alphas;
  for (const auto& f : out.fits)
    if (f.ok) alphas.push_back(f.alpha_hat);
  if (!alphas.empty()) {
    out.alpha_mean = std::accumulate(alphas.begin(), alphas.end(), 0.0) / alphas.size();
    if (alphas.size() > 1) {
      double ss = 0.0;
      for (double a : alphas) ss += (a - out.alpha_mean) * (a - out.alpha_mean);
      out.alpha_spread = std::sqrt(ss / static_cast<double>(alphas.size() - 1));
      out.alpha_pooled_stderr = out.alpha_spread / std::sqrt(static_cast<double>(alphas.size()));
    }
  }
  return out;
}

ProductionConsumptionResult run_production_consumption(const SimConfig& config, double p,
                                                       double c) {
  if (!(p >= 0.0 && c >= 0.0 && std::isfinite(p) && std::isfinite(c)))
    throw ConfigError("production/consumption rates must be finite and non-negative");
  validate(config);
  const double rate = p - c;
  const double horizon = std::abs(rate) * static_cast<double>(config.n_sweeps);
  const double log_total =
      std::log(config.mean_wealth * static_cast<double>(config.n_units));
  if (horizon + std::abs(log_total) > std::log(DBL_MAX) - 1.0)
    throw SimulationError("production-consumption growth leaves the floating-point range");

  ProductionConsumptionResult out;
  out.growth_rate = rate;
  out.raw = simulate(config, std::exp(rate));
  out.conserved = run(config);
  out.raw_total_final =
      std::accumulate(out.raw.final_wealth.begin(), out.raw.final_wealth.end(), 0.0);

  const std::size_t n = out.raw.n_units;
  out.rescaled_samples.reserve(out.raw.samples.size());
  for (std::size_t s = 0; s < out.raw.snapshots.size(); ++s) {
    const double back = std::exp(-rate * static_cast<double>(out.raw.snapshots[s].sweep));
    for (std::size_t i = 0; i < n; ++i) out.rescaled_samples.push_back(out.raw.samples[s * n + i] * back);
  }
  const double back = std::exp(-rate * static_cast<double>(config.n_sweeps));
  out.rescaled_final.reserve(n);
  for (double x : out.raw.final_wealth) out.rescaled_final.push_back(x * back);
  return out;
}

}  // namespace kinex
