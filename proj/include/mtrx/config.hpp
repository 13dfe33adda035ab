// SPDX-License-Identifier: Apache-2.0
/// \file config.hpp
/// \brief Experiment configuration and its flat "key = value" file format.
///
/// One assignment per line, '#' starts a comment, keys are dotted:
///
///   grid.n = 128
///   grid.length = 50.26548245743669
///   params.alpha = 0.5
///   sweep.epsilon_list = 0.1, 0.05, 0.025, 0.0125
///
/// Unknown keys are rejected.
#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "mtrx/errors.hpp"
#include "mtrx/initial.hpp"
#include "mtrx/model.hpp"
#include "mtrx/stepper.hpp"

namespace mtrx {

/// Name of the environment variable that overrides `output.dir`.
inline constexpr const char* kOutputDirEnv = "MTRX_OUTPUT_DIR";

struct ExperimentConfig {
  std::size_t n = 128;
  double length = 2.0 * std::numbers::pi * 8.0;
  /// epsilon here is used by single runs and the probe; sweeps use
  /// epsilon_list and zero for the reference run.
  ModelParams params{.alpha = 0.5, .qbar = 0.9, .epsilon = 0.05, .qhat = 1.0, .mu = 1.0, .eta = 0.0};
  std::vector<double> epsilon_list{0.1, 0.05, 0.025, 0.0125};
  double t_end = 1.0;
  StepperConfig stepper{.dt = 1e-3, .cfl = 0.5, .min_dt = 1e-8, .max_dt = 1.0, .adaptive = true};
  InitialSpec initial;
  std::filesystem::path output_dir = "out";
  std::size_t record_stride = 10;
  std::vector<double> probe_deltas{1e-2, 1e-3, 1e-4};
  /// Accepted slope window for the sup-distance fit.
  double rate_slope_min = 0.4;
  double rate_slope_max = 0.7;

  Grid grid() const { return Grid(n, length); }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(d))
    throw ConfigError("config: '" + key + "' expects a number, got '" + v + "'");
  return d;
}

inline long parse_int(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long i = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || end != v.c_str() + v.size())
    throw ConfigError("config: '" + key + "' expects an integer, got '" + v + "'");
  return i;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("config: '" + key + "' expects a boolean, got '" + v + "'");
}

} // namespace detail

inline std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(detail::parse_double(key, detail::trim(item)));
  if (out.empty()) throw ConfigError("config: '" + key + "' is empty");
  return out;
}

/// Applies one assignment to `cfg`.
inline void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  using detail::parse_bool;
  using detail::parse_double;
  using detail::parse_int;
  auto positive_count = [&](long v) {
    if (v <= 0) throw ConfigError("config: '" + key + "' must be positive");
    return static_cast<std::size_t>(v);
  };
  if (key == "grid.n") cfg.n = positive_count(parse_int(key, value));
  else if (key == "grid.length") cfg.length = parse_double(key, value);
  else if (key == "params.alpha") cfg.params.alpha = parse_double(key, value);
  else if (key == "params.qbar") cfg.params.qbar = parse_double(key, value);
  else if (key == "params.epsilon") cfg.params.epsilon = parse_double(key, value);
  else if (key == "params.qhat") cfg.params.qhat = parse_double(key, value);
  else if (key == "params.mu") cfg.params.mu = parse_double(key, value);
  else if (key == "params.eta") cfg.params.eta = parse_double(key, value);
  else if (key == "sweep.epsilon_list") cfg.epsilon_list = parse_double_list(key, value);
  else if (key == "sweep.slope_min") cfg.rate_slope_min = parse_double(key, value);
  else if (key == "sweep.slope_max") cfg.rate_slope_max = parse_double(key, value);
  else if (key == "probe.deltas") cfg.probe_deltas = parse_double_list(key, value);
  else if (key == "run.t_end") cfg.t_end = parse_double(key, value);
  else if (key == "stepper.dt") cfg.stepper.dt = parse_double(key, value);
  else if (key == "stepper.cfl") cfg.stepper.cfl = parse_double(key, value);
  else if (key == "stepper.min_dt") cfg.stepper.min_dt = parse_double(key, value);
  else if (key == "stepper.max_dt") cfg.stepper.max_dt = parse_double(key, value);
  else if (key == "stepper.adaptive") cfg.stepper.adaptive = parse_bool(key, value);
  else if (key == "stepper.scheme") {
    if (value != "strang_rk2") throw ConfigError("config: unknown stepper.scheme '" + value + "'");
  }
  else if (key == "init.family") cfg.initial.family = value;
  else if (key == "init.u_amplitude") cfg.initial.u_amplitude = parse_double(key, value);
  else if (key == "init.v_amplitude") cfg.initial.v_amplitude = parse_double(key, value);
  else if (key == "init.T_amplitude") cfg.initial.T_amplitude = parse_double(key, value);
  else if (key == "init.q_amplitude") cfg.initial.q_amplitude = parse_double(key, value);
  else if (key == "init.width") cfg.initial.width = parse_double(key, value);
  else if (key == "init.mode") cfg.initial.mode = static_cast<int>(parse_int(key, value));
  else if (key == "init.max_mode") cfg.initial.max_mode = static_cast<int>(parse_int(key, value));
  else if (key == "init.seed") cfg.initial.seed = static_cast<std::uint64_t>(parse_int(key, value));
  else if (key == "init.require_nonpositive_qe") cfg.initial.require_nonpositive_qe = parse_bool(key, value);
  else if (key == "output.dir") cfg.output_dir = value;
  else if (key == "output.stride") cfg.record_stride = positive_count(parse_int(key, value));
  else throw ConfigError("config: unknown key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg = {}) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    apply_setting(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

/// Environment override of the output directory, if set and non-empty.
inline void apply_environment(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) cfg.output_dir = dir;
}

/// Checks the invariants shared by every experiment. `sweep` adds the
/// requirements of the epsilon study.
inline void validate_experiment(const ExperimentConfig& cfg, bool sweep) {
  (void)cfg.grid();
  validate_params(cfg.params);
  validate_config(cfg.stepper);
  if (!(cfg.t_end > 0.0)) throw ConfigError("run.t_end must be positive");
  if (sweep) {
    for (std::size_t i = 0; i < cfg.epsilon_list.size(); ++i) {
      if (!(cfg.epsilon_list[i] > 0.0)) throw ConfigError("sweep.epsilon_list entries must be > 0");
      if (i > 0 && !(cfg.epsilon_list[i] < cfg.epsilon_list[i - 1]))
        throw ConfigError("sweep.epsilon_list must be strictly decreasing");
    }
  }
}

} // namespace mtrx
