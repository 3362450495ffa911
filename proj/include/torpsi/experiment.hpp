#pragma once

// Named experiment scenarios driven by flat key=value configuration files.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "torpsi/error.hpp"

namespace torpsi {

/// Unknown keys, malformed values or invalid parameters in a configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Flat configuration: "key = value" lines, '#' starts a comment.
class ExperimentConfig {
 public:
  static ExperimentConfig parse(std::istream& is);
  static ExperimentConfig load(const std::filesystem::path& path);
  static ExperimentConfig from_map(std::map<std::string, std::string> values);

  const std::string& scenario() const { return scenario_; }
  const std::map<std::string, std::string>& values() const { return values_; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

  void set(const std::string& key, const std::string& value);

 private:
  std::string scenario_;
  std::map<std::string, std::string> values_;
};

struct Verdict {
  std::string name;
  double value = 0.0;
  std::string criterion;  // e.g. "<= 1e-06"
  bool pass = false;
};

struct RunReport {
  std::string scenario;
  std::map<std::string, std::string> config;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<Verdict> verdicts;
  std::vector<std::filesystem::path> outputs;
  double wall_seconds = 0.0;

  bool all_pass() const;
};

/// Command-line overrides; unset fields fall back to the config's `out`,
/// `plot` and `seed` keys.
struct RunOptions {
  std::optional<std::filesystem::path> out_dir;
  bool plot = false;
  std::optional<long long> seed;
};

/// Validates the configuration (ConfigError), runs the scenario and writes its
/// CSV files (and SVG plots when requested) into out_dir.  Numerical failures
/// propagate as the library's Error subclasses.
RunReport run(const ExperimentConfig& config, const RunOptions& options);

/// Human-readable summary of a report.
void print_report(std::ostream& os, const RunReport& report);

/// Scenario names, descriptions, the results they exercise and CSV columns.
std::string list_scenarios();

/// Exit status: 0 all verdicts pass, 2 otherwise.
int exit_code(const RunReport& report);

}  // namespace torpsi
