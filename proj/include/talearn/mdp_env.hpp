#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/label.hpp"
#include "talearn/matrix.hpp"

namespace talearn {

enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3 };
inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kActions{Action::Up, Action::Down, Action::Left, Action::Right};

const char* to_string(Action a);

/// Grid coordinate; y = 0 is the bottom row.
struct Cell {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

/// Labelled gridworld MDP. States are indexed row-major from the bottom-left cell
/// (index = y * width + x). Each action moves one cell in its direction or stays put
/// when a wall blocks it.
class LabelledMdp {
 public:
  LabelledMdp(int width, int height, std::vector<Label> labels, StateId initial_state);

  int width() const { return width_; }
  int height() const { return height_; }
  int num_states() const { return width_ * height_; }
  StateId initial_state() const { return initial_; }

  const Label& label(StateId s) const { return labels_.at(s); }
  const std::vector<Label>& labels() const { return labels_; }
  /// Atomic propositions occurring in any label, sorted.
  std::vector<std::string> propositions() const;
  /// Distinct labels of all states (including ∅ when some cell is unlabelled).
  Alphabet label_alphabet() const;

  StateId successor(StateId s, Action a) const { return next_.at(s)[static_cast<int>(a)]; }
  Cell cell(StateId s) const { return {s % width_, s / width_}; }
  StateId index(Cell c) const { return c.y * width_ + c.x; }
  bool contains(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  /// Number of the four directions blocked by the grid boundary.
  int wall_count(StateId s) const;

 private:
  int width_;
  int height_;
  StateId initial_;
  std::vector<Label> labels_;
  std::vector<std::array<StateId, kNumActions>> next_;
};

/// Throws PreconditionError for non-positive sizes or cells outside the grid.
LabelledMdp build_gridworld(int width, int height, const std::vector<std::pair<Cell, Label>>& labelled_cells,
                            Cell initial_cell);

StateId move(const LabelledMdp& mdp, StateId state, Action action);

/// Per-state distribution over the four actions (indexed by Action).
struct Policy {
  std::vector<std::array<double, kNumActions>> action_distribution;
};

Policy uniform_random_policy(const LabelledMdp& mdp);

/// Markov chain over S induced by following `policy`.
Matrix induced_chain(const LabelledMdp& mdp, const Policy& policy);

/// One exploration episode. All three sequences have length T + 1; trace[t] is the
/// label of states[t] and rewards[t] is 1 iff the task automaton run is accepting at t.
struct Episode {
  std::vector<StateId> states;
  std::vector<Label> trace;
  std::vector<int> rewards;

  std::size_t length() const { return states.size(); }
  friend bool operator==(const Episode&, const Episode&) = default;
};

/// Samples `n_episodes` episodes of `episode_len` steps each. Episode i draws from its
/// own random stream derived from (seed, i). The automaton consumes L(s_{t+1}) on every
/// step; the initial label is not consumed. Throws SimulationError when `hidden_ta`
/// has no transition for an observed label.
std::vector<Episode> simulate_episodes(const LabelledMdp& mdp, const TaskAutomaton& hidden_ta, const Policy& policy,
                                       int episode_len, int n_episodes, std::uint64_t seed);

/// Fraction of episodes with at least one reward.
double reward_fraction(std::span<const Episode> episodes);

/// Throws PreconditionError unless every episode is well-formed for `mdp`.
void validate_episodes(const LabelledMdp& mdp, std::span<const Episode> episodes);

/// Grid description format:
///
///     # comment
///     size 3 3          width height
///     initial 0 0       x y, y = 0 is the bottom row
///     stairs . .        one line per row, top row first
///     . . coffee
///     . . coffee
///
/// Each cell is '.' (empty label) or a label token ("coffee", or "coffee+tv" for a
/// cell carrying several propositions). Throws ParseError with the offending line.
LabelledMdp read_grid(std::istream& in);
void write_grid(std::ostream& out, const LabelledMdp& mdp);

/// Episode file: one record per episode, three aligned token rows (state indices, label
/// tokens, 0/1 rewards), records separated by a blank line.
void write_episodes(std::ostream& out, std::span<const Episode> episodes);
std::vector<Episode> read_episodes(std::istream& in);

}  // namespace talearn
