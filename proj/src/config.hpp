#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace qha::cli {

// Flat key=value configuration with [section] headers; every key is
// addressed as "section.key". Unknown keys are rejected wholesale.
struct ScenarioConfig {
  std::string kind;  // schrodinger | trajectories | ensemble | ck-oracle |
                     // kostin | deterministic-limit | validate
  std::filesystem::path out_dir = "qha-out";
  std::uint64_t seed = 1;

  // [grid]
  double q_min = -12.0;
  double q_max = 12.0;
  int n_points = 1024;

  // [potential]
  std::string potential = "free";  // free | harmonic
  double omega = 1.0;

  // [initial]
  std::string initial = "coherent";  // gaussian | coherent
  double center = 0.0;
  double width = 1.0;
  double momentum = 0.0;
  double q0 = 1.0;
  double p0 = 0.0;

  // [time]
  double dt = 1e-3;
  int n_steps = 1000;
  int snapshot_every = 1;

  // [noise]
  double k_theta = 0.0;
  double d_pp = 0.0;

  // [ensemble]
  int size = 1000;
  double bandwidth = 0.0;  // <= 0: Silverman's rule
  bool quantum_force = true;

  // [kostin]
  double beta = 0.0;
  std::string forcing = "zero";  // zero | sinusoidal | kicks
  double forcing_amplitude = 0.0;
  double forcing_frequency = 1.0;
  double forcing_phase = 0.0;
  double kick_variance = 0.0;
  double kick_interval = 0.1;

  // [limit]
  double theta_max = 0.2;
  int theta_halvings = 4;

  // [validate]
  std::string level = "quick";

  // raw key=value pairs for the manifest echo
  std::map<std::string, std::string> raw;
};

// Parse file + "section.key=value" overrides; QHA_SEED wins over both.
ScenarioConfig load_config(const std::filesystem::path& file,
                           const std::vector<std::string>& overrides = {});

// Overrides-only variant used when the whole config is synthesized (tests).
ScenarioConfig load_config_from_pairs(const std::vector<std::string>& pairs);

}  // namespace qha::cli
