#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/matrix.hpp"
#include "talearn/mdp_env.hpp"

namespace talearn {

/// Product of a labelled MDP with a task automaton. Product state ⟨s,q⟩ has index
/// q * |S| + s, i.e. one block of |S| states per automaton state.
struct ProductModel {
  int num_mdp_states = 0;
  int num_ta_states = 0;
  StateId initial = 0;
  /// One row-stochastic |S⊗| x |S⊗| matrix per action.
  std::array<Matrix, kNumActions> per_action_transition;
  /// Deterministic successor of each product state under each action.
  std::vector<std::array<StateId, kNumActions>> successor;
  std::vector<bool> accepting;
  std::vector<Label> state_label;
  std::vector<std::string> names;

  int size() const { return num_mdp_states * num_ta_states; }
  StateId index(StateId s, StateId q) const { return q * num_mdp_states + s; }
  StateId mdp_state(StateId i) const { return i % num_mdp_states; }
  StateId ta_state(StateId i) const { return i / num_mdp_states; }
  /// Reward for entering `target`: 1 iff its automaton component is accepting.
  int reward(StateId target) const { return accepting[target] ? 1 : 0; }
};

/// What the agent sees of a hidden product state ⟨s,q⟩: the MDP state and χ_F(q).
struct Observation {
  StateId mdp_state = 0;
  int reward_bit = 0;
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Product Markov chain induced by a fixed policy (or learned directly).
struct ProductChain {
  Matrix transition;
  StateId initial = 0;
  std::vector<bool> accepting;
  std::vector<StateId> state_to_mdp;
  std::vector<Label> state_to_label;
  std::vector<std::string> names;

  int size() const { return static_cast<int>(transition.rows()); }
  Observation observe(StateId i) const { return {state_to_mdp[i], accepting[i] ? 1 : 0}; }
};

/// Throws PreconditionError unless `ta` has a transition from every state on every
/// label used by `mdp`.
ProductModel build_product(const LabelledMdp& mdp, const TaskAutomaton& ta);

ProductChain induce_chain(const ProductModel& product, const Policy& policy);

/// Wraps a learned k*|S| x k*|S| matrix in the block layout: hidden state i observes MDP
/// state i mod |S|, the last block is accepting, and the chain starts in block 0.
ProductChain chain_from_block_layout(Matrix transition, const std::vector<Label>& mdp_labels, StateId initial_mdp_state);

/// NFA underlying the chain: states are product states reachable from the initial state
/// through entries above `threshold`, every edge carries the label of its target, and
/// accepting product states accept. State names are the product state names.
Nfa extract_nfa(const ProductChain& chain, double threshold = 0.0);

struct RecoveryOptions {
  /// Largest allowed total-variation distance between MDP marginals of two product
  /// states observing the same MDP state.
  double tolerance = 0.1;
  /// Only product states reachable through entries above this value contribute.
  double reach_threshold = 0.0;
  /// When positive, each product state's marginal is weighted by its expected number of
  /// visits in this many steps from the initial state; otherwise all count equally.
  int occupancy_horizon = 0;
};

/// Marginalizes the chain onto MDP states: P(s_l | s_k) is the mass a product state
/// observing s_k sends to product states observing s_l, averaged over the reachable
/// product states observing s_k (optionally occupancy-weighted). Throws InconsistencyError when those marginals
/// disagree by more than the tolerance.
Matrix recover_mdp_probabilities(const ProductChain& chain, int num_mdp_states, const RecoveryOptions& options = {});

/// Per-action recovery from a product MDP.
std::array<Matrix, kNumActions> recover_mdp_action_probabilities(const ProductModel& product,
                                                                 const RecoveryOptions& options = {});

/// Exact comparison of observation-sequence probabilities of two chains over MDP states,
/// for all sequences of length up to `horizon` + 1. Both chains must observe the same MDP
/// state space. Throws PreconditionError when either chain exceeds `max_states`.
bool observationally_equivalent(const ProductChain& a, const ProductChain& b, int horizon,
                                std::size_t max_states = 4096, double tol = 1e-9);

/// NFA of MDP-attainable traces: one state per MDP state, every state accepting, edges
/// labelled with the label of their target.
Nfa attainable_trace_nfa(const LabelledMdp& mdp);

/// Minimal DFA of the (prefix-closed) set of MDP-attainable traces, over `alphabet`
/// (which must include every label of the MDP).
Dfa attainable_trace_dfa(const LabelledMdp& mdp, const Alphabet& alphabet);

/// Minimal DFA of the MDP-restricted automaton: subset construction of the NFA underlying
/// the uniform-policy product chain.
Dfa mdp_restricted_ta(const LabelledMdp& mdp, const TaskAutomaton& ta);

/// Whether `candidate` agrees with `truth` on every MDP-attainable trace.
bool equivalent_on_attainable_traces(const LabelledMdp& mdp, const TaskAutomaton& candidate,
                                     const TaskAutomaton& truth);

}  // namespace talearn
