#include "kinex/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "kinex/core.hpp"

namespace kinex {

namespace {

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) throw IoError("not a number: '" + text + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_left,bin_right,count,density\n";
  for (std::size_t i = 0; i < h.bins(); ++i) {
    out += format_double(h.edges[i]);
    out += ',';
    out += format_double(h.edges[i + 1]);
    out += ',';
    out += std::to_string(h.counts[i]);
    out += ',';
    out += format_double(h.density(i));
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw IoError("write failed: " + path.string());
}

void export_histogram(const Histogram& histogram, const std::filesystem::path& path) {
  write_text(path, histogram_csv(histogram));
}

Histogram import_histogram(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(f, line) || line != "bin_left,bin_right,count,density")
    throw IoError(path.string() + ": missing histogram header");
  Histogram h;
  std::uint64_t total = 0;
  double implied_n = 0.0;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string left, right, count, density;
    if (!std::getline(ss, left, ',') || !std::getline(ss, right, ',') ||
        !std::getline(ss, count, ',') || !std::getline(ss, density))
      throw IoError(path.string() + ": malformed row '" + line + "'");
    const double lo = parse_double(left);
    const double hi = parse_double(right);
    if (h.edges.empty()) h.edges.push_back(lo);
    if (h.edges.back() != lo) throw IoError(path.string() + ": bins are not contiguous");
    h.edges.push_back(hi);
    const auto c = std::stoull(count);
    h.counts.push_back(c);
    total += c;
    const double d = parse_double(density);
    if (c > 0 && d > 0.0) implied_n = static_cast<double>(c) / (d * (hi - lo));
  }
  h.n_samples = implied_n > 0.0 ? static_cast<std::uint64_t>(std::llround(implied_n)) : total;
  h.out_of_range = h.n_samples - total;
  if (h.edges.size() >= 3) {
    const double r0 = h.edges[1] / h.edges[0];
    const double r1 = h.edges[2] / h.edges[1];
    h.binning = h.edges[0] > 0.0 && std::abs(r0 - r1) < 1e-9 * r0 &&
                        std::abs((h.edges[1] - h.edges[0]) - (h.edges[2] - h.edges[1])) >
                            1e-9 * (h.edges[1] - h.edges[0])
                    ? Binning::Logarithmic
                    : Binning::Linear;
  }
  return h;
}

namespace {

nlohmann::ordered_json fit_json(const FitReport& r, const std::string& label) {
  nlohmann::ordered_json j;
  if (!label.empty()) j["case"] = label;
  j["ok"] = r.ok;
  if (!r.ok) j["failure"] = r.failure;
  j["alpha_hat"] = r.alpha_hat;
  j["alpha_stderr"] = r.alpha_stderr;
  j["ks_statistic"] = r.ks_statistic;
  j["ks_pvalue"] = r.ks_pvalue;
  j["ks_n"] = r.ks_n;
  j["fit_range_min"] = r.fit_range.min;
  j["fit_range_max"] = std::isinf(r.fit_range.max) ? nlohmann::ordered_json("inf")
                                                   : nlohmann::ordered_json(r.fit_range.max);
  j["n_fit"] = r.n_fit;
  if (r.tail) {
    j["tail_pareto_index"] = r.tail->index;
    j["tail_density_exponent"] = r.tail->density_exponent();
    j["tail_stderr"] = r.tail->standard_error;
    j["tail_k"] = r.tail->k;
    j["tail_threshold"] = r.tail->threshold;
    j["tail_power_law"] = r.tail->power_law;
    j["tail_convention"] = "density ~ x^-(1+tail_pareto_index); CCDF ~ x^-tail_pareto_index";
  }
  return j;
}

}  // namespace

std::string fit_report_text(const FitReport& report, const std::string& label) {
  std::string out;
  const auto record = fit_json(report, label);
  for (const auto& [key, value] : record.items()) {
    out += key;
    out += " = ";
    if (value.is_number_float())
      out += format_double(value.get<double>());
    else if (value.is_string())
      out += value.get<std::string>();
    else
      out += value.dump();
    out += '\n';
  }
  return out;
}

std::string fit_report_json(const FitReport& report, const std::string& label) {
  return fit_json(report, label).dump();
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = trim(line.substr(0, eq));
    std::replace(key.begin(), key.end(), '_', '-');
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!out.emplace(key, value).second) throw ConfigError(key + ": duplicate key in config file");
  }
  return out;
}

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace kinex
