#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "talearn/hmm_learner.hpp"

namespace talearn {

enum class InitMode { Spatial, Uniform };

InitMode parse_init_mode(const std::string& s);
const char* to_string(InitMode m);
ObservationMode parse_observation_mode(const std::string& s);
const char* to_string(ObservationMode m);

/// Every pipeline hyperparameter. Defaults are the 3x3 grid / 3-state task setting.
///
///     [environment]
///     grid = builtin:grid3          # or a grid file path
///     task = builtin:coffee_stairs  # or an automaton file path
///     [simulation]
///     episode_length = 34
///     episodes = 275
///     seed = 1
///     [learning]
///     k = 3
///     init = spatial                # spatial | uniform
///     smoothing = 1e-4
///     tol = 1e-6
///     max_iters = 20000
///     threads = 1
///     observation = state           # state | label
///     reestimate_emissions = false
///     [distill]
///     threshold = 0.01
///     k_max = 0                     # > 0 tries k = 1..k_max and keeps the smallest consistent k
struct PipelineConfig {
  std::string grid = "builtin:grid3";
  std::string task = "builtin:coffee_stairs";
  int episode_length = 34;
  int episodes = 275;
  std::uint64_t seed = 1;
  int k = 3;
  InitMode init = InitMode::Spatial;
  double smoothing = 1e-4;
  double tol = 1e-6;
  int max_iters = 20000;
  int threads = 1;
  ObservationMode observation = ObservationMode::State;
  bool reestimate_emissions = false;
  double threshold = 0.01;
  int k_max = 0;

  /// Throws PreconditionError naming the offending key.
  void validate() const;
};

/// Throws ParseError for malformed text or unknown keys.
PipelineConfig read_config(std::istream& in);
PipelineConfig load_config(const std::string& path);
void write_config(std::ostream& out, const PipelineConfig& config);

}  // namespace talearn
