#include "kinex/presets.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "kinex/acceptance.hpp"
#include "kinex/cli.hpp"
#include "kinex/io.hpp"

namespace kinex {

namespace {

// Desk scale: 10^3 units, 10^4 sweeps of which 10^3 equilibrate, 4 replicas.
constexpr std::size_t kUnits = 1000;
constexpr std::size_t kSweeps = 10000;
constexpr std::size_t kEquilibration = 1000;
constexpr std::size_t kReplicas = 4;

SimConfig desk(RuleKind rule, CriterionKind criterion = CriterionKind::Always) {
  SimConfig c;
  c.n_units = kUnits;
  c.n_sweeps = kSweeps;
  c.equilibration_sweeps = kEquilibration;
  c.rule.kind = rule;
  c.criterion.kind = criterion;
  return c;
}

std::string num(double v) { return format_double(v); }

TargetCheck within(std::string name, double value, double target, double tol) {
  return {std::move(name), value, num(target) + " +- " + num(tol),
          std::abs(value - target) <= tol};
}

TargetCheck above(std::string name, double value, double bound) {
  return {std::move(name), value, "> " + num(bound), value > bound};
}

TargetCheck below(std::string name, double value, double bound) {
  return {std::move(name), value, "< " + num(bound), value < bound};
}

TargetCheck holds(std::string name, bool value) {
  return {std::move(name), value ? 1.0 : 0.0, "true", value};
}

double first_bin_ratio(const Histogram& h) {
  double peak = 0.0;
  for (std::size_t i = 0; i < h.bins(); ++i) peak = std::max(peak, h.density(i));
  return peak > 0.0 ? h.density(0) / peak : 0.0;
}

// Criteria of the collapse figure, applied to one exchange rule.
std::vector<ExperimentCase> criterion_family(RuleKind rule) {
  std::vector<ExperimentCase> out;
  out.push_back({"always", desk(rule)});
  for (double eta : {0.1, 0.5, 1.0, 5.0, 10.0}) {
    ExperimentCase c{"linear_eta" + num(eta), desk(rule, CriterionKind::LinearAbsolute)};
    c.config.criterion.eta = eta;
    if (eta < 0.2) {
      // Acceptance near 0.1 makes relaxation roughly a hundred times slower.
      c.config.n_sweeps = 100000;
      c.config.equilibration_sweeps = 50000;
      c.config.snapshot_interval = 100;
      c.ks_stride = 10000;
    }
    out.push_back(c);
  }
  for (double dx0 : {-0.4, -0.2, 0.0, 0.2, 0.4}) {
    ExperimentCase c{"exp_dx0" + num(dx0), desk(rule, CriterionKind::ExponentialAbsolute)};
    c.config.criterion.eta = 0.5;
    c.config.criterion.dx0 = dx0;
    out.push_back(c);
  }
  return out;
}

void pairwise_ks(PresetResult& r) {
  double worst = 1.0;
  std::string pair = "none";
  for (std::size_t a = 0; a < r.cases.size(); ++a)
    for (std::size_t b = a + 1; b < r.cases.size(); ++b) {
      const auto ks = ks_two_sample(r.cases[a].ks_samples, r.cases[b].ks_samples);
      if (ks.pvalue < worst) {
        worst = ks.pvalue;
        pair = r.cases[a].label + " vs " + r.cases[b].label;
      }
    }
  r.checks.push_back(above("pairwise KS min p (" + pair + ")", worst, 0.01));
}

// --------------------------------------------------------------------------

ExperimentPreset preset_immediate() {
  ExperimentPreset p{"immediate", "Immediate exchange without criterion", {}, {}, {}};
  p.cases.push_back({"always", desk(RuleKind::Immediate)});
  p.evaluate = [](PresetResult& r) {
    const auto& c = r.cases[0];
    r.checks.push_back(within("alpha", c.fit.alpha_hat, 2.0, 0.1));
    r.checks.push_back(within("mode", c.mode, 0.5, 0.05));
    r.checks.push_back(below("first-bin density / mode density", first_bin_ratio(c.histogram), 0.05));
  };
  return p;
}

ExperimentPreset preset_dy() {
  ExperimentPreset p{"dy", "Reshuffling of the pair wealth", {}, {}, {}};
  p.cases.push_back({"always", desk(RuleKind::DYReshuffle)});
  p.evaluate = [](PresetResult& r) {
    const auto& c = r.cases[0];
    r.checks.push_back(within("alpha", c.fit.alpha_hat, 1.0, 0.05));
    const auto ks = ks_one_sample(c.ks_samples, [](double x) { return -std::expm1(-x); });
    r.checks.push_back(above("KS p vs exp(-x)", ks.pvalue, 0.01));
  };
  return p;
}

ExperimentPreset preset_cc() {
  ExperimentPreset p{"cc", "Reshuffling with saving propensity", {}, {}, {}};
  for (double lambda : {0.0, 0.1, 0.25, 0.5, 0.7}) {
    ExperimentCase c{"lambda" + num(lambda), desk(RuleKind::CCSaving)};
    c.config.rule.lambda = lambda;
    p.cases.push_back(c);
  }
  p.evaluate = [](PresetResult& r) {
    for (const auto& c : r.cases) {
      const double target = theory_alpha_cc(c.config.rule.lambda);
      r.checks.push_back(
          within("alpha " + c.label, c.fit.alpha_hat, target, std::max(0.1, 0.05 * target)));
    }
  };
  return p;
}

ExperimentPreset preset_angle() {
  ExperimentPreset p{"angle", "One-way flows with saving propensity", {}, {}, {}};
  p.cases.push_back({"lambda0", desk(RuleKind::AngleUnidirectional)});
  for (double lambda : {0.25, 0.5}) {
    ExperimentCase c{"lambda" + num(lambda), desk(RuleKind::AngleSaving)};
    c.config.rule.lambda = lambda;
    p.cases.push_back(c);
  }
  p.evaluate = [](PresetResult& r) {
    for (const auto& c : r.cases) {
      const double target = theory_alpha_angle(c.config.rule.lambda);
      r.checks.push_back(
          within("alpha " + c.label, c.fit.alpha_hat, target, std::max(0.05, 0.1 * target)));
    }
    r.checks.push_back(holds("density increasing towards 0 (lambda0)",
                             density_increasing_at_origin(r.cases[0].histogram)));
  };
  return p;
}

ExperimentPreset preset_fig1() {
  ExperimentPreset p{"fig1", "Mixtures of one-way and immediate exchanges", {}, {}, {}};
  for (double mu : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    ExperimentCase c{"mu" + num(mu), desk(RuleKind::Mixed)};
    c.config.rule.mu = mu;
    c.fit_range = FitRange{kLowWealth};
    p.cases.push_back(c);
  }
  p.evaluate = [](PresetResult& r) {
    for (const auto& c : r.cases) {
      const double mu = c.config.rule.mu;
      r.checks.push_back(
          within("alpha " + c.label + " (x > 0.05)", c.fit.alpha_hat, theory_alpha_mixed(mu), 0.1));
      if (mu >= 0.5) {
        const double predicted = gamma_cdf(kLowWealth, c.fit.alpha_hat);
        r.checks.push_back(
            above("mass below 0.05 / fitted Gamma mass " + c.label, c.low_mass / predicted, 1.0));
      }
    }
  };
  return p;
}

ExperimentPreset preset_fig2() {
  ExperimentPreset p{"fig2", "Acceptance probability curves", {}, {}, {}};
  p.custom = [](PresetResult& r, std::size_t, std::uint64_t) {
    const double eta = 0.5;
    const double dx0s[] = {-0.2, 0.0, 0.2};
    std::string csv = "delta,linear,exp_dx0-0.2,exp_dx0_0,exp_dx0_0.2\n";
    bool in_range = true;
    bool monotone = true;
    double prev[4] = {0, 0, 0, 0};
    for (int i = 0; i <= 200; ++i) {
      const double d = -1.5 + 0.01 * i;
      double q[4] = {accept_prob_linear(d, eta, 1.0), 0, 0, 0};
      for (int k = 0; k < 3; ++k) q[k + 1] = accept_prob_exp(d, eta, dx0s[k], 1.0);
      csv += num(d);
      for (int k = 0; k < 4; ++k) {
        csv += ',' + num(q[k]);
        in_range = in_range && q[k] >= 0.0 && q[k] <= 1.0;
        monotone = monotone && (i == 0 || q[k] >= prev[k]);
        prev[k] = q[k];
      }
      csv += '\n';
    }
    r.files["q_curves.csv"] = csv;
    r.checks.push_back({"all q in [0, 1]", 0.0, "true", in_range});
    r.checks.push_back({"all q non-decreasing in delta", 0.0, "true", monotone});
    r.checks.push_back(within("linear q(-eta/2)", accept_prob_linear(-0.25, eta, 1.0), 0.5, 1e-12));
    r.checks.push_back(within("linear q(-eta)", accept_prob_linear(-0.5, eta, 1.0), 0.0, 1e-12));
    r.checks.push_back(
        within("exp q(0), dx0 = -0.2", accept_prob_exp(0.0, eta, -0.2, 1.0), 1.0, 1e-12));
    r.checks.push_back(within("exp q(0), dx0 = 0.2", accept_prob_exp(0.0, eta, 0.2, 1.0),
                              std::exp(-0.4), 1e-12));
  };
  return p;
}

ExperimentPreset preset_fig3(RuleKind rule) {
  const bool dy = rule == RuleKind::DYReshuffle;
  ExperimentPreset p{dy ? "fig3-dy" : "fig3",
                     dy ? "Criterion invariance of the reshuffling equilibrium"
                        : "Criterion invariance of the immediate-exchange equilibrium",
                     criterion_family(rule),
                     {},
                     {}};
  p.evaluate = [dy](PresetResult& r) {
    for (const auto& c : r.cases) {
      if (dy) {
        r.checks.push_back(within("alpha " + c.label, c.fit.alpha_hat, 1.0, 0.05));
        const auto ks = ks_one_sample(c.ks_samples, [](double x) { return -std::expm1(-x); });
        r.checks.push_back(above("KS p vs exp(-x) " + c.label, ks.pvalue, 0.01));
      } else {
        r.checks.push_back(within("alpha " + c.label, c.fit.alpha_hat, 2.0, 0.1));
      }
    }
    pairwise_ks(r);
  };
  return p;
}

ExperimentPreset preset_fig4() {
  ExperimentPreset p{"fig4", "Relative criterion on the saving-propensity model", {}, {}, {}};
  for (double lambda : {0.0, 0.2, 0.4})
    for (double eta : {0.5, 1.0, 2.0}) {
      ExperimentCase c{"lambda" + num(lambda) + "_eta" + num(eta),
                       desk(RuleKind::CCSaving, CriterionKind::LinearRelative)};
      c.config.rule.lambda = lambda;
      c.config.criterion.eta = eta;
      p.cases.push_back(c);
    }
  p.evaluate = [](PresetResult& r) {
    for (const auto& c : r.cases) {
      r.checks.push_back(above("Gamma KS p " + c.label, c.fit.ks_pvalue, 0.01));
      r.checks.push_back(above("alpha_q - alpha(lambda) " + c.label,
                               c.fit.alpha_hat - theory_alpha_cc(c.config.rule.lambda), 0.0));
    }
    for (std::size_t i = 0; i + 2 < r.cases.size(); i += 3) {
      const double lambda = r.cases[i].config.rule.lambda;
      double l[3];
      for (int k = 0; k < 3; ++k) l[k] = theory_lambda_q(r.cases[i + k].fit.alpha_hat);
      const bool ok = l[0] > l[1] && l[1] > l[2] && l[2] > lambda;
      std::ostringstream v;
      v << "lambda_q decreasing towards " << num(lambda) << " over eta 0.5, 1, 2 ("
        << num(l[0]) << ", " << num(l[1]) << ", " << num(l[2]) << ")";
      r.checks.push_back({v.str(), l[2] - lambda, "monotone", ok});
    }
  };
  return p;
}

ExperimentPreset preset_fig5() {
  ExperimentPreset p{"fig5", "Criterion favouring the richer unit", {}, {}, {}};
  for (double theta : {0.0, 0.3, 0.5, 0.8, 0.9}) {
    ExperimentCase c{"theta" + num(theta), desk(RuleKind::Immediate, CriterionKind::AsymmetricRich)};
    c.config.criterion.theta = theta;
    p.cases.push_back(c);
  }
  p.evaluate = [](PresetResult& r) {
    r.checks.push_back(within("alpha theta0", r.at("theta0").fit.alpha_hat, 2.0, 0.1));
    bool decreasing = true;
    std::string modes;
    for (std::size_t i = 0; i < 4; ++i) {
      modes += (i ? ", " : "") + num(r.cases[i].mode);
      if (i > 0) decreasing = decreasing && r.cases[i].mode < r.cases[i - 1].mode;
    }
    r.checks.push_back({"mode decreasing over theta 0, 0.3, 0.5, 0.8 (" + modes + ")",
                        r.cases[3].mode, "strictly decreasing", decreasing});
    const auto& last = r.at("theta0.9");
    r.checks.push_back(holds("density increasing towards 0 (theta0.9)",
                             density_increasing_at_origin(last.histogram)));
    r.checks.push_back(below("Gamma KS p theta0.9", last.fit.ks_pvalue, 0.01));
  };
  return p;
}

ExperimentPreset preset_fig6() {
  ExperimentPreset p{"fig6", "Two-class heterogeneous acceptance", {}, {}, {}};
  ExperimentCase c{"two_class", desk(RuleKind::Immediate, CriterionKind::HeterogeneousLinear)};
  c.config.eta_spec = TwoClassEta{0.95, 2.0, 0.5, 0.7};
  c.tail_fraction = 0.05;
  p.cases.push_back(c);
  p.evaluate = [](PresetResult& r) {
    const auto& c = r.cases[0];
    const double exponent = c.fit.tail ? c.fit.tail->density_exponent() : 0.0;
    r.checks.push_back(within("tail density exponent (top 5%)", exponent, 2.0, 0.3));
    // The smoothed mode histogram has bins 0.02 wide.
    r.checks.push_back(above("mode", c.mode, 0.02));
  };
  return p;
}

ExperimentPreset preset_fig6_uniform() {
  ExperimentPreset p{"fig6-uniform", "Uniform per-unit acceptance scales", {}, {}, {}};
  for (double hi : {1.0, 2.0, 5.0, 10.0}) {
    ExperimentCase c{"eta_max" + num(hi),
                     desk(RuleKind::Immediate, CriterionKind::HeterogeneousLinear)};
    c.config.eta_spec = UniformEta{0.1, hi};
    p.cases.push_back(c);
  }
  p.evaluate = [](PresetResult& r) {
    for (const char* label : {"eta_max5", "eta_max10"})
      r.checks.push_back(holds(std::string("secondary maximum beyond x = 2 (") + label + ")",
                               has_secondary_maximum(r.at(label).histogram, 2.0)));
  };
  return p;
}

ExperimentPreset preset_production() {
  ExperimentPreset p{"production", "Homogeneous production and consumption", {}, {}, {}};
  p.custom = [](PresetResult& r, std::size_t, std::uint64_t seed) {
    SimConfig c = desk(RuleKind::Immediate);
    c.n_sweeps = 1000;
    c.equilibration_sweeps = 100;
    c.seed = seed;
    const double rate = 0.01;
    const auto grown = run_production_consumption(c, rate, 0.0);

    std::vector<double> rescaled;
    std::vector<double> conserved;
    const std::size_t n = grown.raw.n_units;
    for (std::size_t s = 0; s < grown.raw.snapshots.size(); ++s) {
      if (grown.raw.snapshots[s].sweep % 100 != 0) continue;
      const auto from = static_cast<std::ptrdiff_t>(s * n);
      const auto to = from + static_cast<std::ptrdiff_t>(n);
      rescaled.insert(rescaled.end(), grown.rescaled_samples.begin() + from,
                      grown.rescaled_samples.begin() + to);
      conserved.insert(conserved.end(), grown.conserved.samples.begin() + from,
                       grown.conserved.samples.begin() + to);
    }
    const auto ks = ks_two_sample(rescaled, conserved);
    r.checks.push_back(above("KS p rescaled vs conserved", ks.pvalue, 0.01));
    const double expected_total =
        static_cast<double>(n) * std::exp(rate * static_cast<double>(c.n_sweeps));
    r.checks.push_back(within("raw total / expected total", grown.raw_total_final / expected_total,
                              1.0, 1e-9));

    const auto flat = run_production_consumption(c, 0.02, 0.02);
    const bool identical = flat.raw.samples == flat.conserved.samples &&
                           flat.raw.final_wealth == flat.conserved.final_wealth &&
                           flat.rescaled_final == flat.conserved.final_wealth;
    r.checks.push_back(holds("p = c output bit-identical to conserved run", identical));

    r.files["rescaled.csv"] = histogram_csv(make_histogram(c.histogram, rescaled));
    r.files["conserved.csv"] = histogram_csv(make_histogram(c.histogram, conserved));
    r.files["metadata.txt"] = run_metadata(c, 1) + "production = " + num(rate) +
                              "\nconsumption = 0\n";
  };
  return p;
}

}  // namespace

bool PresetResult::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.passed; });
}

const CaseResult& PresetResult::at(const std::string& label) const {
  for (const auto& c : cases)
    if (c.label == label) return c;
  throw ConfigError("case: no case labelled " + label + " in preset " + name);
}

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> all = {
      preset_immediate(), preset_dy(),     preset_cc(),
      preset_angle(),     preset_fig1(),   preset_fig2(),
      preset_fig3(RuleKind::Immediate),    preset_fig3(RuleKind::DYReshuffle),
      preset_fig4(),      preset_fig5(),   preset_fig6(),
      preset_fig6_uniform(),               preset_production()};
  return all;
}

const ExperimentPreset& find_preset(const std::string& name) {
  std::string names;
  for (const auto& p : presets()) {
    if (p.name == name) return p;
    names += (names.empty() ? "" : ", ") + p.name;
  }
  throw ConfigError("preset: unknown preset '" + name + "'; available: " + names);
}

CaseResult run_case(const ExperimentCase& spec, std::size_t replicas, std::uint64_t seed) {
  SimConfig cfg = spec.config;
  cfg.seed = seed;
  CaseResult out;
  out.label = spec.label;
  out.config = cfg;
  out.replicas = replicas;

  EnsembleResult ens = run_ensemble(cfg, replicas, spec.fit_range);
  out.histogram = ens.histogram;
  out.alpha_spread = ens.alpha_spread;
  out.equilibrated = true;
  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;
  for (const auto& rep : ens.replicas) {
    const auto thin = thinned_samples(rep, spec.ks_stride);
    out.ks_samples.insert(out.ks_samples.end(), thin.begin(), thin.end());
    attempted += rep.trades_attempted;
    accepted += rep.trades_accepted;
    out.max_conservation_drift = std::max(out.max_conservation_drift, rep.conservation_drift);
    out.equilibrated = out.equilibrated && rep.equilibrated;
  }
  ens.replicas.clear();
  out.acceptance_rate = attempted ? static_cast<double>(accepted) / attempted : 0.0;

  out.fit = fit_gamma(ens.samples, spec.fit_range);
  if (out.fit.ok) {
    const auto ks = ks_gamma(out.ks_samples, out.fit.alpha_hat, spec.fit_range);
    out.fit.ks_statistic = ks.statistic;
    out.fit.ks_pvalue = ks.pvalue;
    out.fit.ks_n = static_cast<std::size_t>(
        std::count_if(out.ks_samples.begin(), out.ks_samples.end(), [&](double x) {
          return x > spec.fit_range.min && x < spec.fit_range.max;
        }));
  }
  if (spec.tail_fraction) out.fit.tail = fit_pareto_tail(ens.samples, *spec.tail_fraction, seed, 20);
  out.mode = empirical_mode(ens.samples);
  out.low_mass = empirical_cdf(ens.samples, kLowWealth);
  return out;
}

PresetResult run_preset(const std::string& name, const PresetOptions& options) {
  const ExperimentPreset& preset = find_preset(name);
  const std::size_t replicas = options.replicas.value_or(kReplicas);
  const std::uint64_t seed = options.seed.value_or(1);
  if (replicas == 0) throw ConfigError("replicas: must be at least 1");
  PresetResult result;
  result.name = preset.name;
  if (preset.custom) {
    preset.custom(result, replicas, seed);
    return result;
  }
  for (std::size_t i = 0; i < preset.cases.size(); ++i)
    result.cases.push_back(run_case(preset.cases[i], replicas, seed + 1000 * i));
  if (preset.evaluate) preset.evaluate(result);
  return result;
}

std::string format_check(const TargetCheck& c) {
  return std::string(c.passed ? "PASS" : "FAIL") + "  " + c.name + ": " + num(c.value) +
         " (expected " + c.expectation + ")";
}

void write_preset(const PresetResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::string jsonl;
  for (const auto& c : result.cases) {
    export_histogram(c.histogram, dir / (c.label + ".csv"));
    write_text(dir / (c.label + ".fit.txt"), fit_report_text(c.fit, c.label));
    write_text(dir / (c.label + ".meta.txt"),
               run_metadata(c.config, c.replicas) + "mode = " + num(c.mode) +
                   "\nacceptance_rate = " + num(c.acceptance_rate) +
                   "\nmax_conservation_drift = " + num(c.max_conservation_drift) +
                   "\nequilibrated = " + (c.equilibrated ? "true" : "false") + "\n");
    jsonl += fit_report_json(c.fit, c.label) + "\n";
  }
  if (!result.cases.empty()) write_text(dir / "fits.jsonl", jsonl);
  for (const auto& [file, content] : result.files) write_text(dir / file, content);
  std::string checks;
  for (const auto& c : result.checks) checks += format_check(c) + "\n";
  write_text(dir / "checks.txt", checks);
}

}  // namespace kinex
