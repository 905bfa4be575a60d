#include "talearn/pipeline.hpp"

#include "talearn/distiller.hpp"
#include "talearn/errors.hpp"
#include "talearn/rng.hpp"

namespace talearn {

std::uint64_t init_seed(std::uint64_t seed) { return splitmix64(seed ^ 0x1f2e3d4c5b6a7988ULL); }

HmmParams initial_params(const PipelineConfig& config, const LabelledMdp& mdp, int k) {
  const ObservationEncoder encoder(mdp, config.observation);
  Matrix transition = config.init == InitMode::Spatial
                          ? spatial_initialization(mdp, k, config.smoothing)
                          : uniform_initialization(k * mdp.num_states(), init_seed(config.seed));
  return make_params(std::move(transition), k, mdp, encoder);
}

TrainResult learn_product(const PipelineConfig& config, const LabelledMdp& mdp, std::span<const Episode> episodes,
                          int k) {
  if (episodes.empty()) throw PreconditionError("learning needs at least one episode");
  validate_episodes(mdp, episodes);
  const ObservationEncoder encoder(mdp, config.observation);
  const auto observations = encoder.encode(episodes);
  TrainOptions options;
  options.tol = config.tol;
  options.max_iters = config.max_iters;
  options.reestimate_emissions = config.reestimate_emissions;
  options.threads = config.threads;
  return train(initial_params(config, mdp, k), observations, options);
}

PipelineResult learn_task_automaton(const PipelineConfig& config, const LabelledMdp& mdp,
                                    std::span<const Episode> episodes, int k) {
  PipelineResult r;
  r.k = k;
  auto trained = learn_product(config, mdp, episodes, k);
  r.learned = std::move(trained.params);
  r.train_report = std::move(trained.report);
  r.distilled = distill_ta(r.learned, mdp.labels(), mdp.initial_state(), config.threshold);
  auto debiased = remove_environmental_bias_detailed(r.distilled, episodes);
  r.final_ta = std::move(debiased.ta);
  r.debias_report = std::move(debiased.report);
  return r;
}

SweepResult sweep_k(const PipelineConfig& config, const LabelledMdp& mdp, std::span<const Episode> episodes,
                    int k_max) {
  if (k_max < 1) throw PreconditionError("k_max must be at least 1");
  SweepResult out;
  for (int k = 1; k <= k_max; ++k) {
    SweepAttempt attempt{k, false, {}};
    try {
      auto trained = learn_product(config, mdp, episodes, k);
      Dfa distilled = distill_ta(trained.params, mdp.labels(), mdp.initial_state(), config.threshold);
      if (is_consistent(distilled, episodes)) {
        attempt.consistent = true;
        PipelineResult r;
        r.k = k;
        r.learned = std::move(trained.params);
        r.train_report = std::move(trained.report);
        r.distilled = std::move(distilled);
        auto debiased = remove_environmental_bias_detailed(r.distilled, episodes);
        r.final_ta = std::move(debiased.ta);
        r.debias_report = std::move(debiased.report);
        out.chosen = std::move(r);
      } else {
        attempt.failure = "distilled automaton is inconsistent with the episodes";
      }
    } catch (const Error& e) {
      attempt.failure = e.what();
    }
    out.attempts.push_back(attempt);
    if (attempt.consistent) break;
  }
  return out;
}

}  // namespace talearn
