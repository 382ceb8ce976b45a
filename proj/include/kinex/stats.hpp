#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kinex {

// ---------------------------------------------------------------------------
// Histograms
// ---------------------------------------------------------------------------

enum class Binning { Linear, Logarithmic };

struct HistogramSpec {
  Binning binning = Binning::Logarithmic;
  double lo = 1e-3;
  double hi = 1e2;
  std::size_t bins = 64;
};

struct Histogram {
  Binning binning = Binning::Linear;
  std::vector<double> edges;  // bins + 1, strictly increasing
  std::vector<std::uint64_t> counts;
  std::uint64_t n_samples = 0;     // every sample offered, in range or not
  std::uint64_t out_of_range = 0;  // n_samples - sum(counts)

  std::size_t bins() const noexcept { return counts.size(); }
  double width(std::size_t i) const { return edges[i + 1] - edges[i]; }
  /// Geometric centre for log bins, arithmetic otherwise.
  double center(std::size_t i) const;
  /// count / (n_samples * width); zero for an empty histogram.
  double density(std::size_t i) const;
};

Histogram make_histogram(const HistogramSpec& spec);
void accumulate(Histogram& h, std::span<const double> samples);
Histogram make_histogram(const HistogramSpec& spec, std::span<const double> samples);
/// Adds the counts of `other`; edges must match.
void merge(Histogram& into, const Histogram& other);

// ---------------------------------------------------------------------------
// One-parameter Gamma family with unit mean
// ---------------------------------------------------------------------------

/// f(x) = a^a x^(a-1) exp(-a x) / Gamma(a).
double gamma_pdf(double x, double alpha);
double gamma_cdf(double x, double alpha);

struct FitRange {
  double min = 0.0;
  double max = std::numeric_limits<double>::infinity();
  bool full() const noexcept { return min <= 0.0 && max == std::numeric_limits<double>::infinity(); }
};

struct TailFit {
  double index = 0.0;   // Pareto index p: CCDF ~ x^-p, density ~ x^-(1+p)
  double standard_error = 0.0;  // bootstrap
  std::size_t k = 0;    // order statistics used
  double threshold = 0.0;
  /// Relative change of the index when the tail fraction is quartered.
  double drift = 0.0;
  bool power_law = false;

  /// Exponent of the density tail, f(x) ~ x^-(1 + index).
  double density_exponent() const noexcept { return 1.0 + index; }
};

struct FitReport {
  bool ok = false;
  std::string failure;
  double alpha_hat = 0.0;
  double alpha_stderr = 0.0;
  double ks_statistic = 0.0;
  double ks_pvalue = 0.0;
  std::size_t ks_n = 0;  // samples behind the KS statistic
  std::optional<TailFit> tail;
  FitRange fit_range{};
  std::size_t n_fit = 0;
};

/// Closed-form-free MLE of the unit-mean shape over all positive samples:
/// solves ln a - digamma(a) = mean(x) - mean(ln x) - 1 by bisection on
/// [1e-3, 1e3]. Returns NaN when the samples are degenerate.
double mle_shape(std::span<const double> samples);

/// Maximum-likelihood fit of the unit-mean Gamma shape. Outside the full
/// range the likelihood is the truncated one. The KS statistic compares the
/// in-range samples with the (truncated) fitted CDF.
FitReport fit_gamma(std::span<const double> samples, FitRange range = {});

/// Multinomial likelihood over the bins inside `range`.
FitReport fit_gamma(const Histogram& histogram, FitRange range = {});

/// Hill estimator on the top `tail_fraction` order statistics.
TailFit fit_pareto_tail(std::span<const double> samples, double tail_fraction,
                        std::uint64_t seed = 1, std::size_t bootstrap_replicates = 50);

// ---------------------------------------------------------------------------
// Closed-form shape predictions
// ---------------------------------------------------------------------------

/// Reshuffling with saving propensity lambda: (1 + 2 lambda) / (1 - lambda).
double theory_alpha_cc(double lambda);
/// One-way flow with saving propensity lambda: half of theory_alpha_cc.
double theory_alpha_angle(double lambda);
/// Fraction mu of one-way flows mixed with immediate exchanges: 2^(1 - 2 mu).
double theory_alpha_mixed(double mu);
/// Saving propensity of the one-way model reproducing theory_alpha_mixed(mu).
double theory_lambda_eff(double mu);
/// Inverse of theory_alpha_cc.
double theory_lambda_q(double alpha_q);

// ---------------------------------------------------------------------------
// Goodness of fit
// ---------------------------------------------------------------------------

struct KsResult {
  double statistic = 0.0;
  double pvalue = 1.0;
};

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);
KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf);
/// One-sample test of the samples inside `range` against the unit-mean
/// Gamma(alpha) truncated to that range.
KsResult ks_gamma(std::span<const double> samples, double alpha, FitRange range = {});

// ---------------------------------------------------------------------------
// Shape diagnostics on empirical data
// ---------------------------------------------------------------------------

/// Location of the maximum of a linear histogram on [0, hi) after a
/// centred moving average over `smooth` bins.
double empirical_mode(std::span<const double> samples, double hi = 5.0, std::size_t bins = 250,
                      std::size_t smooth = 5);

/// True when the density strictly increases towards the origin over the
/// first `n` bins of the histogram.
bool density_increasing_at_origin(const Histogram& h, std::size_t n = 3);

/// True when, beyond `x_min`, the density rises again after a dip by at
/// least `z` Poisson standard deviations.
bool has_secondary_maximum(const Histogram& h, double x_min, double z = 4.0);

/// Fraction of samples strictly below x.
double empirical_cdf(std::span<const double> samples, double x);

}  // namespace kinex
