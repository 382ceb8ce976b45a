#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "kinex/stats.hpp"

namespace kinex {

class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal text that parses back to the same double.
std::string format_double(double v);

/// CSV with header `bin_left,bin_right,count,density`, LF line endings.
/// A histogram without bins produces the header alone.
void export_histogram(const Histogram& histogram, const std::filesystem::path& path);
std::string histogram_csv(const Histogram& histogram);
Histogram import_histogram(const std::filesystem::path& path);

/// Flat `key = value` block, one field per line. A non-empty label is
/// written first as `case`.
std::string fit_report_text(const FitReport& report, const std::string& label = {});
/// The same fields as a single JSON object on one line.
std::string fit_report_json(const FitReport& report, const std::string& label = {});

/// Reads `key = value` lines; `#` starts a comment. Keys are normalised to
/// dash form (eta_min -> eta-min). Duplicate keys are errors.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);
std::map<std::string, std::string> parse_config_text(const std::string& text);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace kinex
