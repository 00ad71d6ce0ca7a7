#pragma once

// Experiment configuration, dispatch to the modules, and persistence of
// outputs with a checksummed manifest.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace homog {

inline const std::vector<std::string> kSubcommands{"orbit", "density", "tower",    "decompose",
                                                   "coeffs", "moments", "wip",     "fastslow",
                                                   "semiflow"};

struct ExperimentConfig {
  std::string subcommand;
  // map
  std::string map = "doubling";
  double gamma = 0.25;
  double p = 2.0;
  double eta = 1.0;
  // observable and Monte Carlo
  std::string observable = "cos";
  std::vector<std::size_t> n_grid{10000};
  std::vector<double> q_grid{2.0};
  std::size_t samples = 10000;
  std::uint64_t seed = 1;
  std::string initial = "mu";
  std::size_t burnin = 1000;
  std::size_t workers = 0;
  std::filesystem::path out = "out";
  bool allow_high_q = false;
  // orbit
  double x0 = -1.0;  // negative: random start from the seed
  // density, tower, decompose
  std::size_t bins = 4096;
  std::size_t tau_cap = 1000;
  std::size_t K = 1000;
  bool diagnostics = false;
  // coeffs
  std::vector<std::string> methods{"direct", "green_kubo", "martingale"};
  std::size_t orbit_len = 10000000;
  std::size_t n_max = 1000;
  // wip / fastslow
  std::size_t grid = 10;  // intervals of the uniform time grid
  std::string drift = "linear(-1)";
  std::string noise = "additive";
  std::vector<double> xi{0.0};
  double h = 1e-3;
  // semiflow
  std::string roof = "affine(0.5)";
  std::string flow_observable = "cos";
  double T = 1000.0;
  double dt = 0.0;

  /// Unknown keys and malformed values throw ConfigError naming the field.
  /// Numbers may be given as JSON numbers or decimal strings.
  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  /// Throws ConfigError naming the offending field.
  void validate() const;
};

struct RunManifest {
  nlohmann::json config;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, std::string>> files;  // (name, sha256)
  bool gates_passed = true;  // statistical gates of wip / fastslow / semiflow

  nlohmann::json to_json() const;
};

/// Runs the experiment, writes its outputs into config.out and then
/// manifest.json. On an exception no manifest is written.
RunManifest run(const ExperimentConfig& config);

/// 2 for configuration and domain errors, 3 for convergence failures, 1
/// otherwise.
int exit_code_for(const std::exception& e);

}  // namespace homog
