#pragma once

#include <span>
#include <string>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/mdp_env.hpp"

namespace talearn {

/// True iff, for every episode and step t, running trace[1..t] through `ta` ends in an
/// accepting state exactly when rewards[t] = 1. Symbols outside the alphabet and
/// missing transitions are read as self-loops.
bool is_consistent(const TaskAutomaton& ta, std::span<const Episode> episodes);

/// Merges q with δ(q, label) for every non-loop `label` edge. Within a merged class a
/// member's self-loop gives way to another member's outgoing edge on the same symbol;
/// classes reached by two different outgoing edges on one symbol are merged in turn.
/// `label` self-loops everywhere in the result; a class accepts iff some member accepts.
TaskAutomaton merge_on_label(const TaskAutomaton& ta, const Label& label);

/// Labels ordered by ascending number of occurrences at steps t >= 1 of the traces, ties
/// broken by label text.
std::vector<Label> label_removal_order(const Alphabet& alphabet, std::span<const Episode> episodes);

struct DebiasReport {
  std::vector<Label> removed;
  std::vector<Label> kept;
  std::size_t states_before = 0;
  std::size_t states_after = 0;

  std::string to_text() const;
};

struct DebiasResult {
  TaskAutomaton ta;
  DebiasReport report;
};

/// Greedily merges on each label in label_removal_order, keeping a merge iff the result
/// stays consistent with `episodes`, then minimizes. Throws PreconditionError when `ta`
/// is inconsistent with `episodes` to begin with.
DebiasResult remove_environmental_bias_detailed(const TaskAutomaton& ta, std::span<const Episode> episodes);
TaskAutomaton remove_environmental_bias(const TaskAutomaton& ta, std::span<const Episode> episodes);

}  // namespace talearn
