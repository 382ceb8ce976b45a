#include "kinex/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <boost/math/tools/minima.hpp>

#include "kinex/core.hpp"

namespace kinex {

namespace {

constexpr double kAlphaLo = 1e-3;
constexpr double kAlphaHi = 1e3;

std::size_t bin_index(const Histogram& h, double x) {
  const std::size_t n = h.bins();
  const double lo = h.edges.front();
  const double hi = h.edges.back();
  double t = h.binning == Binning::Logarithmic ? std::log(x / lo) / std::log(hi / lo)
                                               : (x - lo) / (hi - lo);
  auto i = static_cast<std::size_t>(std::clamp(t * static_cast<double>(n), 0.0,
                                               static_cast<double>(n - 1)));
  // Correct for rounding at the edges.
  while (i > 0 && x < h.edges[i]) --i;
  while (i + 1 < n && x >= h.edges[i + 1]) ++i;
  return i;
}

/// P(a < X < b) under the unit-mean Gamma law.
double gamma_mass(double alpha, double a, double b) {
  const double fb = std::isinf(b) ? 1.0 : boost::math::gamma_p(alpha, alpha * b);
  const double fa = a <= 0.0 ? 0.0 : boost::math::gamma_p(alpha, alpha * a);
  return fb - fa;
}

/// Maximises `loglik` over ln(alpha) in [ln 1e-3, ln 1e3]; returns alpha and
/// the observed-information standard error.
template <class F>
std::pair<double, double> maximise_shape(F loglik) {
  auto neg = [&](double log_a) { return -loglik(std::exp(log_a)); };
  const auto [log_a, value] = boost::math::tools::brent_find_minima(
      neg, std::log(kAlphaLo), std::log(kAlphaHi), 40);
  (void)value;
  const double a = std::exp(log_a);
  const double h = 1e-4 * a;
  const double curvature = (loglik(a + h) - 2.0 * loglik(a) + loglik(a - h)) / (h * h);
  const double se = curvature < 0.0 ? 1.0 / std::sqrt(-curvature) : std::nan("");
  return {a, se};
}

double hill_index(std::vector<double>& values, std::size_t k) {
  const std::size_t n = values.size();
  const auto pivot = values.begin() + static_cast<std::ptrdiff_t>(n - k - 1);
  std::nth_element(values.begin(), pivot, values.end());
  const double threshold = *pivot;
  if (!(threshold > 0.0)) throw DomainError("fit_pareto_tail: tail threshold is not positive");
  double sum = 0.0;
  for (auto it = pivot + 1; it != values.end(); ++it) sum += std::log(*it / threshold);
  return static_cast<double>(k) / sum;
}

}  // namespace

// ---------------------------------------------------------------------------

double Histogram::center(std::size_t i) const {
  return binning == Binning::Logarithmic ? std::sqrt(edges[i] * edges[i + 1])
                                         : 0.5 * (edges[i] + edges[i + 1]);
}

double Histogram::density(std::size_t i) const {
  if (n_samples == 0) return 0.0;
  return static_cast<double>(counts[i]) / (static_cast<double>(n_samples) * width(i));
}

Histogram make_histogram(const HistogramSpec& spec) {
  if (spec.bins == 0) throw ConfigError("histogram: need at least one bin");
  if (!(spec.lo < spec.hi)) throw ConfigError("histogram: need lo < hi");
  if (spec.binning == Binning::Logarithmic && !(spec.lo > 0.0))
    throw ConfigError("histogram: logarithmic binning needs lo > 0");
  Histogram h;
  h.binning = spec.binning;
  h.edges.resize(spec.bins + 1);
  const auto n = static_cast<double>(spec.bins);
  for (std::size_t i = 0; i <= spec.bins; ++i) {
    const double t = static_cast<double>(i) / n;
    h.edges[i] = spec.binning == Binning::Logarithmic ? spec.lo * std::pow(spec.hi / spec.lo, t)
                                                      : spec.lo + (spec.hi - spec.lo) * t;
  }
  h.edges.front() = spec.lo;
  h.edges.back() = spec.hi;
  h.counts.assign(spec.bins, 0);
  return h;
}

void accumulate(Histogram& h, std::span<const double> samples) {
  const double lo = h.edges.front();
  const double hi = h.edges.back();
  for (double x : samples) {
    ++h.n_samples;
    if (!(x >= lo && x < hi)) {
      ++h.out_of_range;
      continue;
    }
    ++h.counts[bin_index(h, x)];
  }
}

Histogram make_histogram(const HistogramSpec& spec, std::span<const double> samples) {
  Histogram h = make_histogram(spec);
  accumulate(h, samples);
  return h;
}

void merge(Histogram& into, const Histogram& other) {
  if (into.edges != other.edges || into.binning != other.binning)
    throw ConfigError("histogram: cannot merge histograms with different edges");
  for (std::size_t i = 0; i < into.bins(); ++i) into.counts[i] += other.counts[i];
  into.n_samples += other.n_samples;
  into.out_of_range += other.out_of_range;
}

// ---------------------------------------------------------------------------

double gamma_pdf(double x, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("gamma_pdf: alpha must be positive");
  if (x < 0.0) return 0.0;
  if (x == 0.0) {
    if (alpha < 1.0) return std::numeric_limits<double>::infinity();
    return alpha == 1.0 ? 1.0 : 0.0;
  }
  const double log_f = alpha * std::log(alpha) + (alpha - 1.0) * std::log(x) - alpha * x -
                       std::lgamma(alpha);
  return std::exp(log_f);
}

double gamma_cdf(double x, double alpha) {
  if (!(alpha > 0.0)) throw DomainError("gamma_cdf: alpha must be positive");
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(alpha, alpha * x);
}

double mle_shape(std::span<const double> samples) {
  double sum_x = 0.0;
  double sum_log = 0.0;
  std::size_t n = 0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double x : samples) {
    if (!(x > 0.0)) continue;
    sum_x += x;
    sum_log += std::log(x);
    lo = std::min(lo, x);
    hi = std::max(hi, x);
    ++n;
  }
  if (n < 2 || lo == hi) return std::nan("");
  const double target = sum_x / n - sum_log / n - 1.0;
  // ln a - digamma(a) decreases monotonically from +inf to 0.
  auto g = [](double a) { return std::log(a) - boost::math::digamma(a); };
  double a_lo = kAlphaLo;
  double a_hi = kAlphaHi;
  if (target >= g(a_lo)) return a_lo;
  if (target <= g(a_hi)) return a_hi;
  while (a_hi - a_lo > 1e-10) {
    const double mid = 0.5 * (a_lo + a_hi);
    (g(mid) > target ? a_lo : a_hi) = mid;
  }
  return 0.5 * (a_lo + a_hi);
}

KsResult ks_gamma(std::span<const double> samples, double alpha, FitRange range) {
  std::vector<double> in_range;
  in_range.reserve(samples.size());
  for (double x : samples)
    if (x > range.min && x < range.max) in_range.push_back(x);
  const double f_lo = gamma_cdf(range.min, alpha);
  const double mass = gamma_mass(alpha, range.min, range.max);
  return ks_one_sample(in_range, [&](double x) { return (gamma_cdf(x, alpha) - f_lo) / mass; });
}

FitReport fit_gamma(std::span<const double> samples, FitRange range) {
  FitReport report;
  report.fit_range = range;
  if (!(range.min < range.max)) {
    report.failure = "empty fit range";
    return report;
  }
  std::vector<double> in_range;
  in_range.reserve(samples.size());
  for (double x : samples)
    if (x > range.min && x < range.max) in_range.push_back(x);
  report.n_fit = in_range.size();
  if (in_range.size() < 2) {
    report.failure = "fewer than two samples in fit range";
    return report;
  }
  const auto [lo_it, hi_it] = std::minmax_element(in_range.begin(), in_range.end());
  if (*lo_it == *hi_it) {
    report.failure = "degenerate samples (all equal)";
    return report;
  }

  const auto n = static_cast<double>(in_range.size());
  double mean_x = 0.0;
  double mean_log = 0.0;
  for (double x : in_range) {
    mean_x += x;
    mean_log += std::log(x);
  }
  mean_x /= n;
  mean_log /= n;

  if (range.full()) {
    report.alpha_hat = mle_shape(in_range);
    const double info = boost::math::trigamma(report.alpha_hat) - 1.0 / report.alpha_hat;
    report.alpha_stderr = 1.0 / std::sqrt(n * info);
  } else {
    auto loglik = [&](double a) {
      const double mass = gamma_mass(a, range.min, range.max);
      if (!(mass > 0.0)) return -std::numeric_limits<double>::infinity();
      return n * (a * std::log(a) - std::lgamma(a) + (a - 1.0) * mean_log - a * mean_x -
                  std::log(mass));
    };
    std::tie(report.alpha_hat, report.alpha_stderr) = maximise_shape(loglik);
  }

  if (!(report.alpha_hat > kAlphaLo && report.alpha_hat < kAlphaHi)) {
    report.failure = "shape estimate hit the search bound";
    return report;
  }

  const auto ks = ks_gamma(in_range, report.alpha_hat, range);
  report.ks_statistic = ks.statistic;
  report.ks_pvalue = ks.pvalue;
  report.ks_n = in_range.size();
  report.ok = true;
  return report;
}

FitReport fit_gamma(const Histogram& histogram, FitRange range) {
  FitReport report;
  report.fit_range = range;
  std::vector<std::size_t> used;
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < histogram.bins(); ++i) {
    if (histogram.edges[i] >= range.min && histogram.edges[i + 1] <= range.max) {
      used.push_back(i);
      total += histogram.counts[i];
    }
  }
  report.n_fit = total;
  std::size_t occupied = 0;
  for (auto i : used) occupied += histogram.counts[i] > 0 ? 1 : 0;
  if (occupied < 2) {
    report.failure = "fewer than two occupied bins in fit range";
    return report;
  }
  const double outer_lo = histogram.edges[used.front()];
  const double outer_hi = histogram.edges[used.back() + 1];

  auto loglik = [&](double a) {
    const double z = gamma_mass(a, outer_lo, outer_hi);
    if (!(z > 0.0)) return -std::numeric_limits<double>::infinity();
    double ll = 0.0;
    for (auto i : used) {
      if (histogram.counts[i] == 0) continue;
      const double p = gamma_mass(a, histogram.edges[i], histogram.edges[i + 1]) / z;
      if (!(p > 0.0)) return -std::numeric_limits<double>::infinity();
      ll += static_cast<double>(histogram.counts[i]) * std::log(p);
    }
    return ll;
  };
  std::tie(report.alpha_hat, report.alpha_stderr) = maximise_shape(loglik);
  if (!(report.alpha_hat > kAlphaLo && report.alpha_hat < kAlphaHi)) {
    report.failure = "shape estimate hit the search bound";
    return report;
  }

  // KS distance evaluated at the bin edges.
  const double a = report.alpha_hat;
  const double z = gamma_mass(a, outer_lo, outer_hi);
  double d = 0.0;
  std::uint64_t cum = 0;
  for (auto i : used) {
    cum += histogram.counts[i];
    const double model = gamma_mass(a, outer_lo, histogram.edges[i + 1]) / z;
    d = std::max(d, std::abs(static_cast<double>(cum) / static_cast<double>(total) - model));
  }
  const double ne = static_cast<double>(total);
  report.ks_statistic = d;
  report.ks_n = total;
  report.ks_pvalue = kolmogorov_survival((std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d);
  report.ok = true;
  return report;
}

TailFit fit_pareto_tail(std::span<const double> samples, double tail_fraction, std::uint64_t seed,
                        std::size_t bootstrap_replicates) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 0.2))
    throw ConfigError("tail_fraction: must lie in (0, 0.2]");
  const std::size_t n = samples.size();
  const auto k = static_cast<std::size_t>(tail_fraction * static_cast<double>(n));
  if (k < 100 || k + 1 > n)
    throw DomainError("fit_pareto_tail: need at least 100 tail samples, have " + std::to_string(k));

  std::vector<double> work(samples.begin(), samples.end());
  TailFit fit;
  fit.k = k;
  fit.index = hill_index(work, k);
  fit.threshold = work[n - k - 1];

  const std::size_t k_small = k / 4;
  if (k_small >= 25) {
    const double narrow = hill_index(work, k_small);
    fit.drift = narrow / fit.index - 1.0;
    fit.power_law = std::abs(fit.drift) < 0.15;
  }

  if (bootstrap_replicates > 1) {
    RngStream rng(seed, 2);
    std::vector<double> indices;
    indices.reserve(bootstrap_replicates);
    for (std::size_t b = 0; b < bootstrap_replicates; ++b) {
      for (std::size_t i = 0; i < n; ++i) work[i] = samples[rng.index(n)];
      indices.push_back(hill_index(work, k));
    }
    const double mean = std::accumulate(indices.begin(), indices.end(), 0.0) / indices.size();
    double ss = 0.0;
    for (double v : indices) ss += (v - mean) * (v - mean);
    fit.standard_error = std::sqrt(ss / static_cast<double>(indices.size() - 1));
  }
  return fit;
}

// ---------------------------------------------------------------------------

double theory_alpha_cc(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("theory_alpha_cc: lambda in [0, 1)");
  return (1.0 + 2.0 * lambda) / (1.0 - lambda);
}

double theory_alpha_angle(double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw DomainError("theory_alpha_angle: lambda in [0, 1)");
  return (1.0 + 2.0 * lambda) / (2.0 * (1.0 - lambda));
}

double theory_alpha_mixed(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("theory_alpha_mixed: mu in [0, 1]");
  return std::exp2(1.0 - 2.0 * mu);
}

double theory_lambda_eff(double mu) {
  if (!(mu >= 0.0 && mu <= 1.0)) throw DomainError("theory_lambda_eff: mu in [0, 1]");
  const double s = std::exp2(2.0 * (1.0 - mu));
  return (s - 1.0) / (s + 2.0);
}

double theory_lambda_q(double alpha_q) {
  if (!(alpha_q > 0.0)) throw DomainError("theory_lambda_q: alpha must be positive");
  return (alpha_q - 1.0) / (alpha_q + 2.0);
}

// ---------------------------------------------------------------------------

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.18) {
    // Small-argument series of the CDF.
    const double pi = std::numbers::pi;
    const double w = -pi * pi / (8.0 * lambda * lambda);
    double cdf = 0.0;
    for (int j = 1; j <= 6; ++j) {
      const double m = 2.0 * j - 1.0;
      cdf += std::exp(m * m * w);
    }
    cdf *= std::sqrt(2.0 * pi) / lambda;
    return std::clamp(1.0 - cdf, 0.0, 1.0);
  }
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-17) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw ConfigError("ks_two_sample: both samples must be non-empty");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < x.size() && j < y.size()) {
    const double v = std::min(x[i], y[j]);
    while (i < x.size() && x[i] == v) ++i;
    while (j < y.size() && y[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
  }
  const double ne = n * m / (n + m);
  const double sq = std::sqrt(ne);
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

KsResult ks_one_sample(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw ConfigError("ks_one_sample: empty sample");
  std::vector<double> x(samples.begin(), samples.end());
  std::sort(x.begin(), x.end());
  const auto n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = cdf(x[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  const double sq = std::sqrt(n);
  return {d, kolmogorov_survival((sq + 0.12 + 0.11 / sq) * d)};
}

// ---------------------------------------------------------------------------

double empirical_mode(std::span<const double> samples, double hi, std::size_t bins,
                      std::size_t smooth) {
  const Histogram h = make_histogram({Binning::Linear, 0.0, hi, bins}, samples);
  const std::size_t half = smooth / 2;
  double best = -1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < h.bins(); ++i) {
    const std::size_t from = i >= half ? i - half : 0;
    const std::size_t to = std::min(h.bins() - 1, i + half);
    double s = 0.0;
    for (std::size_t t = from; t <= to; ++t) s += static_cast<double>(h.counts[t]);
    s /= static_cast<double>(to - from + 1);
    if (s > best) {
      best = s;
      best_i = i;
    }
  }
  return h.center(best_i);
}

bool density_increasing_at_origin(const Histogram& h, std::size_t n) {
  if (h.bins() < n || n < 2) return false;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (!(h.density(i) > h.density(i + 1))) return false;
  return true;
}

bool has_secondary_maximum(const Histogram& h, double x_min, double z) {
  if (h.n_samples == 0) return false;
  const auto n = static_cast<double>(h.n_samples);
  auto sigma2 = [&](std::size_t i) {
    const double w = n * h.width(i);
    return static_cast<double>(h.counts[i]) / (w * w);
  };
  auto above = [&](std::size_t hi, std::size_t lo) {
    return h.density(hi) - h.density(lo) > z * std::sqrt(sigma2(hi) + sigma2(lo));
  };
  // Peak q, dip m, peak p with q < m < p and p beyond x_min.
  for (std::size_t p = 2; p < h.bins(); ++p) {
    if (h.center(p) <= x_min) continue;
    for (std::size_t m = 1; m < p; ++m) {
      if (!above(p, m)) continue;
      for (std::size_t q = 0; q < m; ++q)
        if (above(q, m)) return true;
    }
  }
  return false;
}

double empirical_cdf(std::span<const double> samples, double x) {
  if (samples.empty()) return 0.0;
  const auto below = std::count_if(samples.begin(), samples.end(), [x](double v) { return v < x; });
  return static_cast<double>(below) / static_cast<double>(samples.size());
}

}  // namespace kinex
