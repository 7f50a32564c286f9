#pragma once

// Resolved run configuration of the `ias` command-line tool.
// Layers: built-in defaults < config file < command-line flags.

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ias/ias.h"
#include "json.hpp"

namespace cli {

enum class Command { spectrum, evolve, sweep, classify, robustness };

const char* to_string(Command c);

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AxisSpec {
  double lo = 0.05;
  double hi = 8.0;
  std::size_t n = 81;
  bool log = true;

  std::vector<double> values() const;
  std::string text() const;
};

AxisSpec parse_axis(const std::string& text);

struct RunConfig {
  Command command = Command::spectrum;
  ias_model_params model{};

  double ti = 0.0;
  double tf = 0.0;
  std::size_t samples = 2001;
  double tol = 1e-9;

  bool lindblad = false;
  double kappa = 0.0;
  int channel = IAS_CHANNEL_DECAY;
  bool baseline = false;

  AxisSpec grid_x0{};
  AxisSpec grid_wc{};
  bool omega_over_g = false;

  double rel_sigma = 0.1;
  std::size_t n_samples = 100;
  std::uint64_t seed = 1;
  bool gaussian = false;

  // Execution settings: not part of the hashed configuration.
  std::size_t workers = 1;
  std::string out;
  bool resume = false;

  nlohmann::json resolved;  // every key that influences the results
};

/// Keys a config file may contain for `c` (flags use the same names with
/// '-' in place of '_').
const std::vector<std::string>& allowed_keys(Command c);

/// Reads a flat JSON config, or the "config" object of a run manifest.
nlohmann::json load_config_file(const std::string& path, Command c);

/// Merges the layers, applies defaults and validates. Throws ConfigError.
RunConfig resolve(Command c, const nlohmann::json& file_layer, const nlohmann::json& flag_layer);

/// SHA-256 (hex) of the canonical serialisation of command + resolved config.
/// Keys are sorted, so the hash does not depend on the order in the file.
std::string config_hash(Command c, const nlohmann::json& resolved);

}  // namespace cli
