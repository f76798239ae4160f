#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "sievelab/prime_engine.hpp"

namespace sievelab {

inline constexpr const char* kVersion = "1.0.0";

// Malformed or unknown configuration; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Model { primes, cramer, bft };

std::string model_name(Model m);
bool is_stochastic(Model m);

// The set A on [1, upto] for a model; seed is ignored for primes.
IntegerSet model_set(Model m, std::uint64_t upto, std::uint64_t seed);

// integral_2^x dt / log^m t.
double log_power_integral(double x, int m);

using Cell = std::variant<std::monostate, std::int64_t, std::uint64_t, double, std::string>;

struct Table {
  std::string name;
  std::string provenance;  // exact, monte-carlo, proxy or nominal columns described in words
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
};

struct ExperimentReport {
  std::string experiment;
  nlohmann::json config;  // after command-line overrides
  std::string version;
  double wall_clock_seconds;
  std::vector<Table> tables;
};

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"gap_tail", "poisson_fit", "model_compare", "breakdown_scan"};
  return names;
}

// Checks keys and values for the named experiment and fills defaults.
nlohmann::json normalize_config(const std::string& experiment, const nlohmann::json& config);

ExperimentReport run_gap_tail(const nlohmann::json& config);
ExperimentReport run_poisson_fit(const nlohmann::json& config);
ExperimentReport run_model_compare(const nlohmann::json& config);
ExperimentReport run_breakdown_scan(const nlohmann::json& config);

ExperimentReport run_experiment(const std::string& experiment, const nlohmann::json& config);

void write_table_csv(std::ostream& out, const Table& t);
nlohmann::json report_json(const ExperimentReport& r);

// <dir>/<experiment>.json and <dir>/<experiment>_<table>.csv; returns the paths written.
std::vector<std::filesystem::path> write_report(const ExperimentReport& r, const std::filesystem::path& dir);

}  // namespace sievelab
