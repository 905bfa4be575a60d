#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "talearn/label.hpp"

namespace talearn {

using StateId = int;
inline constexpr StateId kNoState = -1;

/// Nondeterministic finite automaton over an alphabet of labels.
/// `delta[q][a]` is the sorted, duplicate-free set of successors of q on symbol a.
struct Nfa {
  Alphabet alphabet;
  StateId initial = 0;
  std::vector<std::vector<std::vector<StateId>>> delta;
  std::vector<bool> accepting;
  std::vector<std::string> names;

  Nfa() = default;
  explicit Nfa(Alphabet sigma) : alphabet(std::move(sigma)) {}

  std::size_t size() const { return delta.size(); }
  StateId add_state(std::string name = {}, bool accept = false);
  void add_transition(StateId src, std::size_t symbol, StateId dst);
  void add_transition(StateId src, const Label& symbol, StateId dst);
  const std::vector<StateId>& targets(StateId q, std::size_t symbol) const { return delta[q][symbol]; }
  bool is_deterministic() const;
  std::size_t num_transitions() const;
  std::string name(StateId q) const;
  /// Throws PreconditionError when an index is out of range.
  void validate() const;
};

/// Deterministic finite automaton; `delta[q][a] == kNoState` marks a missing transition.
struct Dfa {
  Alphabet alphabet;
  StateId initial = 0;
  std::vector<std::vector<StateId>> delta;
  std::vector<bool> accepting;
  std::vector<std::string> names;

  Dfa() = default;
  explicit Dfa(Alphabet sigma) : alphabet(std::move(sigma)) {}

  std::size_t size() const { return delta.size(); }
  StateId add_state(std::string name = {}, bool accept = false);
  /// Throws PreconditionError if a different target is already set.
  void set_transition(StateId src, std::size_t symbol, StateId dst);
  void set_transition(StateId src, const Label& symbol, StateId dst);
  StateId next(StateId q, std::size_t symbol) const { return delta[q][symbol]; }
  bool is_complete() const;
  std::string name(StateId q) const;
  void validate() const;
  /// Symbols that label at least one non-loop transition.
  std::vector<Label> labels_in_use() const;
};

/// A task automaton is a DFA over 2^AP whose accepting states mark task completion.
using TaskAutomaton = Dfa;

/// How to fill missing transitions: the figure convention is that unlisted labels
/// self-loop; `Sink` routes them to a fresh rejecting trap state instead.
enum class Completion { SelfLoop, Sink };

struct RunResult {
  StateId final_state = kNoState;
  bool accepted = false;
};

/// Runs `word` from the initial state. A missing transition rejects (final_state is
/// kNoState). Throws PreconditionError for a symbol outside the alphabet.
RunResult run(const Dfa& dfa, std::span<const Label> word);

bool accepts(const Nfa& nfa, std::span<const Label> word);

Dfa complete(Dfa dfa, Completion policy = Completion::SelfLoop);
Nfa complete(Nfa nfa, Completion policy = Completion::SelfLoop);

/// Re-expresses `dfa` over a superset alphabet; new symbols are filled per `policy`.
Dfa extend_alphabet(const Dfa& dfa, const Alphabet& alphabet, Completion policy = Completion::SelfLoop);

Nfa to_nfa(const Dfa& dfa);

/// Rabin-Scott determinization over reachable subsets. The result is complete: the
/// empty subset becomes a rejecting trap state when it is reachable.
Dfa subset_construction(const Nfa& nfa);

/// Hopcroft partition refinement. Requires a complete DFA; unreachable states are
/// dropped and the result is renumbered in breadth-first order from the initial state.
Dfa minimize(const Dfa& dfa);

/// Greedy minimization of a partial DFA that treats missing transitions as unconstrained.
/// Two states merge when no word defined from both separates their acceptance and every
/// merge forced by determinism stays compatible. The result agrees with `dfa` on every
/// word `dfa` defines and stays partial; it is not guaranteed to be minimal.
Dfa minimize_partial(const Dfa& dfa);

/// Drops states unreachable from the initial state.
Dfa trim(const Dfa& dfa);

/// Language equality by searching the synchronous product for a distinguishing state.
/// Missing transitions behave as a rejecting sink. Throws on alphabet mismatch.
bool language_equivalent(const Dfa& a, const Dfa& b);

/// Equality of L(a) and L(b) on the words accepted by `domain`.
bool language_equivalent_within(const Dfa& a, const Dfa& b, const Dfa& domain);

/// A shortest word accepted by exactly one of a and b; nullopt when the languages agree.
std::optional<std::vector<Label>> distinguishing_word(const Dfa& a, const Dfa& b);

/// Structural equality up to renaming of states (both must be reachable and complete
/// for the answer to be meaningful).
bool isomorphic(const Dfa& a, const Dfa& b);

std::string to_dot(const Dfa& dfa, const std::string& graph_name = "ta");
std::string to_dot(const Nfa& nfa, const std::string& graph_name = "nfa");

/// Plain-text automaton format:
///
///     # comment
///     alphabet . coffee stairs
///     states q0 q1 q2
///     initial q0
///     accepting q2
///     q0 coffee q1
///     q1 stairs q2
///
/// One transition per line (`src symbol dst`). Several lines with the same source and
/// symbol make the automaton nondeterministic.
void write_text(std::ostream& out, const Dfa& dfa);
void write_text(std::ostream& out, const Nfa& nfa);
Nfa read_nfa_text(std::istream& in);
/// Throws ParseError if the text describes a nondeterministic automaton.
Dfa read_dfa_text(std::istream& in);

}  // namespace talearn
