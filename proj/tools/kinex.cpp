// Command-line front end: single runs, production-consumption runs and presets.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "kinex/cli.hpp"
#include "kinex/engine.hpp"
#include "kinex/io.hpp"
#include "kinex/presets.hpp"

using namespace kinex;

namespace {

int run_named_preset(const CliRequest& req) {
  PresetOptions opt;
  opt.replicas = req.replicas;
  opt.seed = req.config.seed;
  const PresetResult result = run_preset(*req.preset, opt);
  const auto dir = req.out_dir / result.name;
  write_preset(result, dir);
  for (const auto& c : result.checks) std::cout << format_check(c) << '\n';
  std::cout << (result.passed() ? "preset " + result.name + ": all targets pass"
                                : "preset " + result.name + ": target failures")
            << " (output in " << dir.string() << ")\n";
  return result.passed() ? 0 : 1;
}

int run_growth(const CliRequest& req) {
  const auto out = run_production_consumption(req.config, *req.production, *req.consumption);
  std::filesystem::create_directories(req.out_dir);
  const FitRange range{req.fit_min};
  const FitReport fit = fit_gamma(out.rescaled_samples, range);
  export_histogram(make_histogram(req.config.histogram, out.rescaled_samples),
                   req.out_dir / "rescaled.csv");
  export_histogram(out.raw.histogram, req.out_dir / "raw.csv");
  write_text(req.out_dir / "fit.txt", fit_report_text(fit, "rescaled"));
  write_text(req.out_dir / "fit.jsonl", fit_report_json(fit, "rescaled") + "\n");
  write_text(req.out_dir / "metadata.txt",
             run_metadata(req.config, 1) + "production = " + format_double(*req.production) +
                 "\nconsumption = " + format_double(*req.consumption) +
                 "\nrescaling = x exp[-(p - c) t], t in sweeps\n");
  std::cout << "growth rate per sweep: " << format_double(out.growth_rate) << '\n'
            << "raw final total: " << format_double(out.raw_total_final) << '\n'
            << fit_report_text(fit, "rescaled");
  return 0;
}

int run_single(const CliRequest& req) {
  const FitRange range{req.fit_min};
  const EnsembleResult ens = run_ensemble(req.config, req.replicas, range);
  FitReport fit = fit_gamma(ens.samples, range);
  if (req.tail_fraction) fit.tail = fit_pareto_tail(ens.samples, *req.tail_fraction, req.config.seed);
  std::filesystem::create_directories(req.out_dir);
  export_histogram(ens.histogram, req.out_dir / "histogram.csv");
  write_text(req.out_dir / "fit.txt", fit_report_text(fit));
  std::string jsonl;
  for (std::size_t r = 0; r < ens.fits.size(); ++r)
    jsonl += fit_report_json(ens.fits[r], "replica" + std::to_string(r)) + "\n";
  jsonl += fit_report_json(fit, "pooled") + "\n";
  write_text(req.out_dir / "fit.jsonl", jsonl);

  std::uint64_t attempted = 0;
  std::uint64_t accepted = 0;
  double drift = 0.0;
  bool equilibrated = true;
  for (const auto& rep : ens.replicas) {
    attempted += rep.trades_attempted;
    accepted += rep.trades_accepted;
    drift = std::max(drift, rep.conservation_drift);
    equilibrated = equilibrated && rep.equilibrated;
  }
  const double rate = attempted ? static_cast<double>(accepted) / attempted : 0.0;
  write_text(req.out_dir / "metadata.txt",
             run_metadata(req.config, req.replicas) + "acceptance_rate = " + format_double(rate) +
                 "\nmax_conservation_drift = " + format_double(drift) +
                 "\nequilibrated = " + (equilibrated ? "true" : "false") + "\n");

  std::cout << fit_report_text(fit) << "alpha_spread = " << format_double(ens.alpha_spread) << '\n'
            << "acceptance_rate = " << format_double(rate) << '\n'
            << "equilibrated = " << (equilibrated ? "true" : "false") << '\n'
            << "output = " << req.out_dir.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    const CliRequest req = parse_config(std::vector<std::string>(argv + 1, argv + argc));
    if (req.help) {
      std::cout << req.help_text;
      return 0;
    }
    if (req.list_presets) {
      for (const auto& p : presets()) std::cout << p.name << "  " << p.description << '\n';
      return 0;
    }
    if (req.preset) return run_named_preset(req);
    if (req.production) return run_growth(req);
    return run_single(req);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
