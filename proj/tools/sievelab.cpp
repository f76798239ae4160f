#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sievelab/lab.hpp"
#include "sievelab/parallel.hpp"
#include "sievelab/prime_engine.hpp"

namespace {
constexpr int kConfigError = 2;
constexpr int kModuleError = 3;
}  // namespace

int main(int argc, char** argv) {
  using namespace sievelab;
  CLI::App app{"Sieve and prime-gap experiment runner"};
  std::string experiment, config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  app.add_option("experiment", experiment, "gap_tail | poisson_fit | model_compare | breakdown_scan")
      ->required()
      ->check(CLI::IsMember(experiment_names()));
  app.add_option("--config", config_path, "JSON experiment configuration")->required();
  app.add_option("--out", out_dir, "output directory (default: current directory)");
  app.add_option("--seed", seed, "replace the configured seeds with this one");
  app.add_option("--threads", threads, "worker threads (0 = all cores)");
  app.set_version_flag("--version", std::string("sievelab ") + kVersion);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  nlohmann::json config;
  try {
    if (const char* cap = std::getenv("SIEVELAB_MAX_X")) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(cap, &used);
      } catch (const std::logic_error&) {
        used = 0;
      }
      if (used == 0 || used != std::string(cap).size() || !(v >= 1 && v <= 1e19))
        throw ConfigError("SIEVELAB_MAX_X must be a positive number");
      set_max_sieve_limit(static_cast<std::uint64_t>(v));
    }
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config " + config_path);
    config = nlohmann::json::parse(in);
    if (seed) config["seeds"] = nlohmann::json::array({*seed});
    normalize_config(experiment, config);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  }

  try {
    set_thread_count(threads);
    const ExperimentReport r = run_experiment(experiment, config);
    for (const auto& p : write_report(r, out_dir)) std::cout << p.string() << '\n';
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << experiment << " failed (config " << config_path << ", x = " << config.value("x", 0.0)
              << "): " << e.what() << '\n';
    return kModuleError;
  }
  return 0;
}
