#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "talearn/label.hpp"
#include "talearn/matrix.hpp"
#include "talearn/mdp_env.hpp"

namespace talearn {

/// What the learner sees besides the reward bit: the MDP state or only its label.
enum class ObservationMode { State, Label };

/// Observation index sequence. State mode encodes ⟨s, r⟩ as r * |S| + s; label mode
/// encodes ⟨L(s), r⟩ as r * |labels| + label index.
using ObservationSeq = std::vector<int>;

class ObservationEncoder {
 public:
  ObservationEncoder(const LabelledMdp& mdp, ObservationMode mode);

  ObservationMode mode() const { return mode_; }
  /// Number of distinct non-reward symbols (|S| or the number of distinct labels).
  int num_symbols() const { return num_symbols_; }
  int num_observations() const { return 2 * num_symbols_; }
  int symbol(StateId s) const { return symbol_of_state_.at(s); }
  int encode(StateId s, int reward_bit) const { return reward_bit * num_symbols_ + symbol(s); }
  ObservationSeq encode(const Episode& episode) const;
  std::vector<ObservationSeq> encode(std::span<const Episode> episodes) const;

 private:
  ObservationMode mode_;
  int num_symbols_;
  std::vector<int> symbol_of_state_;
};

struct HmmParams {
  Matrix transition;
  Matrix emission;
  Vector initial;

  int n_hidden() const { return static_cast<int>(transition.rows()); }
  int n_observations() const { return static_cast<int>(emission.cols()); }
  /// Throws PreconditionError on shape mismatches, negative entries or rows not summing
  /// to one within `tol`.
  void validate(double tol = 1e-9) const;
};

/// E^Z_k: a (k * n_states) x (2 * n_states) 0/1 matrix. Hidden state q * n_states + s
/// emits ⟨s, 0⟩ for q < k - 1 and ⟨s, 1⟩ for the last (accepting) block.
Matrix build_emission_matrix(int k, int n_states);

/// ρ: all mass on ⟨s0, q0⟩, i.e. hidden state s0 of block 0.
Vector initial_distribution(int k, int n_states, StateId initial_state);

/// Grid prior: Q̃ moves to each open neighbour with 0.25 and stays with 0.25 per adjacent
/// wall; the result is I_k ⊗ Q̃ with `smoothing` / (k |S|) added to every zero entry,
/// then renormalized.
Matrix spatial_initialization(const LabelledMdp& mdp, int k, double smoothing);

/// Random row-stochastic matrix with strictly positive entries.
Matrix uniform_initialization(int n_hidden, std::uint64_t seed);

/// Parameters with structured emissions (state or label mode) for a transition guess.
HmmParams make_params(Matrix transition, int k, const LabelledMdp& mdp, const ObservationEncoder& encoder);

struct ForwardBackwardResult {
  /// T x n posterior state marginals.
  Matrix gamma;
  /// n x n expected transition counts summed over the sequence.
  Matrix xi;
  double log_likelihood = 0.0;
};

/// Scaled forward-backward pass. Throws ImpossibleObservation naming the first step at
/// which the sequence has zero probability.
ForwardBackwardResult forward_backward(const HmmParams& params, const ObservationSeq& obs);

/// log Pr[obs] from the scaled forward recursion alone.
double log_likelihood(const HmmParams& params, const ObservationSeq& obs);

struct PassOptions {
  bool reestimate_emissions = false;
  /// Worker threads for the E-step; results do not depend on this value.
  int threads = 1;
};

struct PassResult {
  HmmParams params;
  /// Maximum absolute row sum of the change in the transition matrix.
  double delta = 0.0;
  /// Total log-likelihood of the episodes under the input parameters.
  double log_likelihood = 0.0;
  /// Hidden states with no expected visits; their rows are left unchanged.
  std::vector<int> zero_visit_rows;
};

/// One multi-sequence EM update: expected counts are accumulated over all episodes before
/// dividing. The initial distribution is never re-estimated.
PassResult baum_welch_pass(const HmmParams& params, std::span<const ObservationSeq> episodes,
                           const PassOptions& options = {});

struct TrainReport {
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  std::vector<double> log_likelihood_trace;
  double wall_time_seconds = 0.0;
  std::vector<int> zero_visit_rows;

  std::string to_key_value() const;
  static std::string csv_header();
  std::string csv_row() const;
};

struct TrainOptions {
  double tol = 1e-6;
  int max_iters = 10000;
  bool reestimate_emissions = false;
  int threads = 1;
  /// When positive, `on_checkpoint` is called after every `checkpoint_every` passes.
  int checkpoint_every = 0;
  std::function<void(int iteration, const HmmParams&)> on_checkpoint;
};

struct TrainResult {
  HmmParams params;
  TrainReport report;
};

/// Iterates baum_welch_pass until delta < tol or max_iters passes. Throws
/// NumericalFailure when a pass produces non-finite parameters.
TrainResult train(const HmmParams& init, std::span<const ObservationSeq> episodes, const TrainOptions& options = {});

}  // namespace talearn
