#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/config.hpp"
#include "talearn/debiasing.hpp"
#include "talearn/hmm_learner.hpp"
#include "talearn/mdp_env.hpp"

namespace talearn {

/// Seed of the uniform initialization, derived from the top-level seed.
std::uint64_t init_seed(std::uint64_t seed);

/// Initial parameters for `k` hidden blocks per the config's init mode.
HmmParams initial_params(const PipelineConfig& config, const LabelledMdp& mdp, int k);

/// Step 1: Baum-Welch on the encoded episodes.
TrainResult learn_product(const PipelineConfig& config, const LabelledMdp& mdp, std::span<const Episode> episodes,
                          int k);

struct PipelineResult {
  int k = 0;
  HmmParams learned;
  TrainReport train_report;
  Dfa distilled;
  DebiasReport debias_report;
  Dfa final_ta;
};

/// Steps 1-3 for a fixed k. Step-2 structural errors propagate.
PipelineResult learn_task_automaton(const PipelineConfig& config, const LabelledMdp& mdp,
                                    std::span<const Episode> episodes, int k);

struct SweepAttempt {
  int k = 0;
  bool consistent = false;
  std::string failure;
};

struct SweepResult {
  std::vector<SweepAttempt> attempts;
  std::optional<PipelineResult> chosen;
};

/// Tries k = 1..k_max and keeps the smallest k whose distilled automaton is consistent
/// with every episode. Failures (errors or inconsistency) are recorded per attempt.
SweepResult sweep_k(const PipelineConfig& config, const LabelledMdp& mdp, std::span<const Episode> episodes,
                    int k_max);

}  // namespace talearn
