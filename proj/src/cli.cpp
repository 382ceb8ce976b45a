#include "kinex/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "kinex/io.hpp"

namespace kinex {

namespace {

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError(key + ": " + what);
}

double number(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty() || !std::isfinite(v))
    fail(key, "expected a finite number, got '" + text + "'");
  return v;
}

std::uint64_t count(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    fail(key, "expected a non-negative integer, got '" + text + "'");
  return v;
}

double unit_interval(const std::string& key, const std::string& text, bool open_top) {
  const double v = number(key, text);
  if (v < 0.0 || v > 1.0 || (open_top && v == 1.0))
    fail(key, std::string("must lie in [0, 1") + (open_top ? ")" : "]") + ", got " + text);
  return v;
}

double positive(const std::string& key, const std::string& text) {
  const double v = number(key, text);
  if (!(v > 0.0)) fail(key, "must be positive, got " + text);
  return v;
}

RuleKind parse_rule(const std::string& text) {
  if (text == "immediate") return RuleKind::Immediate;
  if (text == "dy") return RuleKind::DYReshuffle;
  if (text == "cc") return RuleKind::CCSaving;
  if (text == "angle") return RuleKind::AngleUnidirectional;
  if (text == "angle-saving") return RuleKind::AngleSaving;
  if (text == "mixed") return RuleKind::Mixed;
  fail("rule", "unknown rule '" + text + "' (immediate, dy, cc, angle, angle-saving, mixed)");
}

CriterionKind parse_criterion(const std::string& text) {
  if (text == "always") return CriterionKind::Always;
  if (text == "linear") return CriterionKind::LinearAbsolute;
  if (text == "exp") return CriterionKind::ExponentialAbsolute;
  if (text == "relative") return CriterionKind::LinearRelative;
  if (text == "asymmetric") return CriterionKind::AsymmetricRich;
  if (text == "hetero-linear") return CriterionKind::HeterogeneousLinear;
  fail("criterion",
       "unknown criterion '" + text + "' (always, linear, exp, relative, asymmetric, hetero-linear)");
}

TwoClassEta parse_two_class(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 4) fail("two-class", "expected FRAC,ETA_MAJOR,MIN,MAX, got '" + text + "'");
  TwoClassEta t;
  t.fraction_major = unit_interval("two-class", parts[0], false);
  t.eta_major = positive("two-class", parts[1]);
  t.minor_min = positive("two-class", parts[2]);
  t.minor_max = positive("two-class", parts[3]);
  if (t.minor_min > t.minor_max) fail("two-class", "need MIN <= MAX");
  return t;
}

}  // namespace

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "rule",          "criterion",   "lambda",      "mu",        "p0",
      "theta",         "eta",         "dx0",         "eta-min",   "eta-max",
      "two-class",     "n",           "sweeps",      "equilibration",
      "replicas",      "seed",        "out",         "preset",    "snapshot-interval",
      "mean-wealth",   "production",  "consumption", "fit-min",   "tail-fraction"};
  return keys;
}

std::string to_string(RuleKind kind) {
  switch (kind) {
    case RuleKind::Immediate: return "immediate";
    case RuleKind::DYReshuffle: return "dy";
    case RuleKind::CCSaving: return "cc";
    case RuleKind::AngleUnidirectional: return "angle";
    case RuleKind::AngleSaving: return "angle-saving";
    case RuleKind::Mixed: return "mixed";
  }
  return "?";
}

std::string to_string(CriterionKind kind) {
  switch (kind) {
    case CriterionKind::Always: return "always";
    case CriterionKind::LinearAbsolute: return "linear";
    case CriterionKind::ExponentialAbsolute: return "exp";
    case CriterionKind::LinearRelative: return "relative";
    case CriterionKind::AsymmetricRich: return "asymmetric";
    case CriterionKind::HeterogeneousLinear: return "hetero-linear";
  }
  return "?";
}

CliRequest request_from_settings(const std::map<std::string, std::string>& settings) {
  const auto& known = config_keys();
  for (const auto& [key, value] : settings)
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(key + ": unknown key");

  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = settings.find(key);
    return it == settings.end() ? nullptr : &it->second;
  };

  CliRequest req;
  SimConfig& c = req.config;
  req.out_dir = default_output_dir();

  // Range checks first, independent of what uses the value.
  if (auto v = get("lambda")) c.rule.lambda = unit_interval("lambda", *v, true);
  if (auto v = get("mu")) c.rule.mu = unit_interval("mu", *v, false);
  if (auto v = get("p0")) c.rule.p0 = unit_interval("p0", *v, false);
  if (auto v = get("theta")) c.criterion.theta = unit_interval("theta", *v, false);
  if (auto v = get("eta")) c.criterion.eta = positive("eta", *v);
  if (auto v = get("dx0")) c.criterion.dx0 = number("dx0", *v);
  if (auto v = get("n")) {
    c.n_units = count("n", *v);
    if (c.n_units < 2) fail("n", "need at least 2 units");
  }
  if (auto v = get("sweeps")) {
    c.n_sweeps = count("sweeps", *v);
    if (c.n_sweeps == 0) fail("sweeps", "must be positive");
    c.equilibration_sweeps = c.n_sweeps / 10;
  }
  if (auto v = get("equilibration")) {
    c.equilibration_sweeps = count("equilibration", *v);
    if (c.equilibration_sweeps >= c.n_sweeps) fail("equilibration", "must be smaller than sweeps");
  }
  if (auto v = get("replicas")) {
    req.replicas = count("replicas", *v);
    if (req.replicas == 0) fail("replicas", "must be at least 1");
  }
  if (auto v = get("seed")) c.seed = count("seed", *v);
  if (auto v = get("snapshot-interval")) {
    c.snapshot_interval = count("snapshot-interval", *v);
    if (c.snapshot_interval == 0) fail("snapshot-interval", "must be positive");
  }
  if (auto v = get("mean-wealth")) c.mean_wealth = positive("mean-wealth", *v);
  if (auto v = get("out")) {
    if (v->empty()) fail("out", "empty path");
    req.out_dir = *v;
  }
  if (auto v = get("preset")) req.preset = *v;
  if (auto v = get("production")) {
    req.production = number("production", *v);
    if (*req.production < 0.0) fail("production", "must be non-negative");
  }
  if (auto v = get("consumption")) {
    req.consumption = number("consumption", *v);
    if (*req.consumption < 0.0) fail("consumption", "must be non-negative");
  }
  if (req.production.has_value() != req.consumption.has_value())
    fail(req.production ? "consumption" : "production",
         "production and consumption must be given together");
  if (auto v = get("fit-min")) {
    req.fit_min = number("fit-min", *v);
    if (req.fit_min < 0.0) fail("fit-min", "must be non-negative");
  }
  if (auto v = get("tail-fraction")) {
    const double f = number("tail-fraction", *v);
    if (!(f > 0.0 && f <= 0.2)) fail("tail-fraction", "must lie in (0, 0.2]");
    req.tail_fraction = f;
  }

  if (auto v = get("rule")) c.rule.kind = parse_rule(*v);
  if (auto v = get("criterion")) c.criterion.kind = parse_criterion(*v);

  // Required and unused parameters.
  const RuleKind rk = c.rule.kind;
  const bool needs_lambda = rk == RuleKind::CCSaving || rk == RuleKind::AngleSaving;
  const bool uses_p0 = rk == RuleKind::AngleUnidirectional || rk == RuleKind::AngleSaving;
  if (needs_lambda && !get("lambda"))
    fail("lambda", "required by --rule " + to_string(rk));
  if (!needs_lambda && get("lambda")) fail("lambda", "not used by --rule " + to_string(rk));
  if (rk == RuleKind::Mixed && !get("mu")) fail("mu", "required by --rule mixed");
  if (rk != RuleKind::Mixed && get("mu")) fail("mu", "not used by --rule " + to_string(rk));
  if (!uses_p0 && get("p0")) fail("p0", "not used by --rule " + to_string(rk));

  const CriterionKind ck = c.criterion.kind;
  const bool uses_eta = ck == CriterionKind::LinearAbsolute ||
                        ck == CriterionKind::ExponentialAbsolute ||
                        ck == CriterionKind::LinearRelative;
  const std::string crit = "--criterion " + to_string(ck);
  if (uses_eta && !get("eta")) fail("eta", "required by " + crit);
  if (!uses_eta && get("eta")) fail("eta", "not used by " + crit);
  if (ck != CriterionKind::ExponentialAbsolute && get("dx0")) fail("dx0", "not used by " + crit);
  if (ck == CriterionKind::AsymmetricRich && !get("theta")) fail("theta", "required by " + crit);
  if (ck != CriterionKind::AsymmetricRich && get("theta")) fail("theta", "not used by " + crit);

  const bool has_min = get("eta-min") != nullptr;
  const bool has_max = get("eta-max") != nullptr;
  const bool has_two = get("two-class") != nullptr;
  if (ck == CriterionKind::HeterogeneousLinear) {
    if (has_two && (has_min || has_max))
      fail("two-class", "give either --two-class or --eta-min/--eta-max, not both");
    if (has_two) {
      c.eta_spec = parse_two_class(*get("two-class"));
    } else if (has_min && has_max) {
      UniformEta u{positive("eta-min", *get("eta-min")), positive("eta-max", *get("eta-max"))};
      if (u.min > u.max) fail("eta-max", "must not be below eta-min");
      c.eta_spec = u;
    } else if (has_min || has_max) {
      fail(has_min ? "eta-max" : "eta-min", "eta-min and eta-max must be given together");
    } else {
      fail("eta-min", "hetero-linear needs --eta-min/--eta-max or --two-class");
    }
  } else {
    for (const char* key : {"eta-min", "eta-max", "two-class"})
      if (get(key)) fail(key, "not used by " + crit);
  }

  validate(c);
  return req;
}

CliRequest parse_config(const std::vector<std::string>& args) {
  CLI::App app{"Kinetic wealth-exchange simulator", "kinex"};
  app.set_help_flag("-h,--help", "Print this help and exit");
  std::map<std::string, std::string> flags;
  std::string config_file;
  bool list = false;
  app.add_option("--config", config_file, "key = value settings file; flags override it");
  app.add_flag("--list-presets", list, "List the available presets and exit");
  const std::map<std::string, std::string> descriptions = {
      {"rule", "immediate|dy|cc|angle|angle-saving|mixed"},
      {"criterion", "always|linear|exp|relative|asymmetric|hetero-linear"},
      {"lambda", "Saving propensity in [0, 1) (cc, angle-saving)"},
      {"mu", "Fraction of one-way trades in [0, 1] (mixed)"},
      {"p0", "Probability that j gives in one-way trades (angle, angle-saving)"},
      {"theta", "Rejection fraction of poorer-gains trades (asymmetric)"},
      {"eta", "Acceptance scale (linear, exp, relative)"},
      {"dx0", "Threshold shift (exp)"},
      {"eta-min", "Lower bound of uniform per-unit eta (hetero-linear)"},
      {"eta-max", "Upper bound of uniform per-unit eta (hetero-linear)"},
      {"two-class", "FRAC,ETA_MAJOR,MIN,MAX per-unit eta recipe (hetero-linear)"},
      {"n", "Number of units"},
      {"sweeps", "Total sweeps; one sweep is N attempted trades"},
      {"equilibration", "Sweeps discarded before sampling (default sweeps/10)"},
      {"replicas", "Independent replicas, seeds seed..seed+R-1"},
      {"seed", "Base seed"},
      {"out", "Output directory (default $KINEX_OUT_DIR or ./kinex-out)"},
      {"preset", "Run a named preset and check its targets"},
      {"snapshot-interval", "Sweeps between recorded snapshots"},
      {"mean-wealth", "Initial wealth of every unit"},
      {"production", "Production rate per sweep"},
      {"consumption", "Consumption rate per sweep"},
      {"fit-min", "Lower edge of the Gamma fit range"},
      {"tail-fraction", "Fit a Pareto tail to this upper fraction"}};
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> options;
  for (const auto& key : config_keys()) {
    options[key] = app.add_option("--" + key, raw[key], descriptions.at(key));
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    CliRequest req;
    req.help = true;
    req.help_text = app.help();
    return req;
  } catch (const CLI::ParseError& e) {
    throw ConfigError(std::string("command line: ") + e.what());
  }

  std::map<std::string, std::string> settings;
  if (!config_file.empty()) settings = read_config_file(config_file);
  for (const auto& [key, opt] : options)
    if (opt->count() > 0) settings[key] = raw[key];

  if (list) {
    CliRequest req;
    req.list_presets = true;
    return req;
  }
  return request_from_settings(settings);
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("KINEX_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return "kinex-out";
}

std::string run_metadata(const SimConfig& c, std::size_t replicas) {
  std::ostringstream out;
  out << "time_unit = sweep\n"
      << "sweep_definition = N attempted pair trades, rejected trades included\n"
      << "tail_convention = pareto index p from the Hill estimator: CCDF ~ x^-p, density ~ "
         "x^-(1+p); density exponent reported as 1+p\n"
      << "rule = " << to_string(c.rule.kind) << '\n'
      << "lambda = " << format_double(c.rule.lambda) << '\n'
      << "mu = " << format_double(c.rule.mu) << '\n'
      << "p0 = " << format_double(c.rule.p0) << '\n'
      << "criterion = " << to_string(c.criterion.kind) << '\n'
      << "eta = " << format_double(c.criterion.eta) << '\n'
      << "dx0 = " << format_double(c.criterion.dx0) << '\n'
      << "theta = " << format_double(c.criterion.theta) << '\n';
  if (c.eta_spec) {
    if (const auto* u = std::get_if<UniformEta>(&*c.eta_spec))
      out << "eta_min = " << format_double(u->min) << "\neta_max = " << format_double(u->max)
          << '\n';
    if (const auto* t = std::get_if<TwoClassEta>(&*c.eta_spec))
      out << "two_class = " << format_double(t->fraction_major) << ','
          << format_double(t->eta_major) << ',' << format_double(t->minor_min) << ','
          << format_double(t->minor_max) << '\n';
  }
  out << "n = " << c.n_units << '\n'
      << "sweeps = " << c.n_sweeps << '\n'
      << "equilibration = " << c.equilibration_sweeps << '\n'
      << "snapshot_interval = " << c.snapshot_interval << '\n'
      << "seed = " << c.seed << '\n'
      << "replicas = " << replicas << '\n';
  return out.str();
}

}  // namespace kinex
