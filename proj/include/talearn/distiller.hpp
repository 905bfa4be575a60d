#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/hmm_learner.hpp"
#include "talearn/label.hpp"

namespace talearn {

/// Classes of NFA states merged by Cone Lumping. Class ids follow breadth-first order
/// of the quotient automaton from the initial class.
struct LumpPartition {
  std::vector<int> class_of;
  std::vector<StateId> representative;

  std::size_t num_classes() const { return representative.size(); }
};

struct LumpStats {
  /// Successor edges inspected while merging cones.
  std::size_t check_operations = 0;
  /// Outer rounds, including the final round that changes nothing.
  int rounds = 0;
  /// Number of classes after each round.
  std::vector<std::size_t> class_counts;
};

struct LumpResult {
  Dfa ta;
  LumpPartition partition;
  LumpStats stats;
};

/// Merges, for every class and label, all same-label successors into one class until a
/// fixpoint. The quotient is deterministic; a class is accepting iff its members are.
/// Throws StructuralError when a class mixes accepting and rejecting states or the
/// quotient stays nondeterministic.
LumpResult cone_lump_detailed(const Nfa& nfa);
Dfa cone_lump(const Nfa& nfa);

/// Number of merge-check operations Cone Lumping performs on `nfa`.
std::size_t lump_complexity_probe(const Nfa& nfa);

/// Step 2 on learned parameters in block layout: thresholded NFA extraction, Cone
/// Lumping, self-loop completion.
Dfa distill_ta(const HmmParams& learned, const std::vector<Label>& mdp_labels, StateId initial_mdp_state,
               double threshold);

/// Same, returning the intermediate NFA and partition for inspection.
struct Distillation {
  Nfa nfa;
  LumpResult lump;
  Dfa ta;
};
Distillation distill_detailed(const HmmParams& learned, const std::vector<Label>& mdp_labels,
                              StateId initial_mdp_state, double threshold);

/// DOT drawing of `nfa` with one cluster per lumped class.
std::string partition_to_dot(const Nfa& nfa, const LumpPartition& partition);

}  // namespace talearn
