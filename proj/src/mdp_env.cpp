#include "talearn/mdp_env.hpp"

#include <algorithm>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "talearn/errors.hpp"
#include "talearn/rng.hpp"

namespace talearn {

const char* to_string(Action a) {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
  }
  return "?";
}

LabelledMdp::LabelledMdp(int width, int height, std::vector<Label> labels, StateId initial_state)
    : width_(width), height_(height), initial_(initial_state), labels_(std::move(labels)) {
  if (width < 1 || height < 1) throw PreconditionError("grid dimensions must be positive");
  if (labels_.size() != static_cast<std::size_t>(num_states())) {
    throw PreconditionError("expected one label per state");
  }
  if (initial_ < 0 || initial_ >= num_states()) throw PreconditionError("initial state out of range");
  next_.resize(num_states());
  for (StateId s = 0; s < num_states(); ++s) {
    const Cell c = cell(s);
    const std::array<Cell, kNumActions> moved{Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}, Cell{c.x - 1, c.y},
                                              Cell{c.x + 1, c.y}};
    for (int a = 0; a < kNumActions; ++a) next_[s][a] = contains(moved[a]) ? index(moved[a]) : s;
  }
}

std::vector<std::string> LabelledMdp::propositions() const {
  std::set<std::string> props;
  for (const auto& l : labels_) props.insert(l.propositions().begin(), l.propositions().end());
  return {props.begin(), props.end()};
}

Alphabet LabelledMdp::label_alphabet() const { return Alphabet(labels_); }

int LabelledMdp::wall_count(StateId s) const {
  int walls = 0;
  for (Action a : kActions) walls += successor(s, a) == s;
  return walls;
}

LabelledMdp build_gridworld(int width, int height, const std::vector<std::pair<Cell, Label>>& labelled_cells,
                            Cell initial_cell) {
  if (width < 1 || height < 1) throw PreconditionError("grid dimensions must be positive");
  auto in_range = [&](Cell c) { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; };
  std::vector<Label> labels(static_cast<std::size_t>(width) * height);
  for (const auto& [c, l] : labelled_cells) {
    if (!in_range(c)) {
      throw PreconditionError("labelled cell (" + std::to_string(c.x) + "," + std::to_string(c.y) +
                              ") is outside the grid");
    }
    labels[c.y * width + c.x] = l;
  }
  if (!in_range(initial_cell)) throw PreconditionError("initial cell is outside the grid");
  return LabelledMdp(width, height, std::move(labels), initial_cell.y * width + initial_cell.x);
}

StateId move(const LabelledMdp& mdp, StateId state, Action action) { return mdp.successor(state, action); }

Policy uniform_random_policy(const LabelledMdp& mdp) {
  Policy p;
  p.action_distribution.assign(mdp.num_states(), {0.25, 0.25, 0.25, 0.25});
  return p;
}

Matrix induced_chain(const LabelledMdp& mdp, const Policy& policy) {
  if (policy.action_distribution.size() != static_cast<std::size_t>(mdp.num_states())) {
    throw PreconditionError("policy does not cover every state");
  }
  Matrix chain = Matrix::Zero(mdp.num_states(), mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s)
    for (Action a : kActions) chain(s, mdp.successor(s, a)) += policy.action_distribution[s][static_cast<int>(a)];
  return chain;
}

namespace {

Action sample_action(const std::array<double, kNumActions>& dist, std::mt19937_64& rng) {
  const double u = unit_uniform(rng);
  double acc = 0.0;
  for (int a = 0; a < kNumActions; ++a) {
    acc += dist[a];
    if (u < acc) return static_cast<Action>(a);
  }
  // Rounding left u above the cumulative sum: take the last action with mass.
  for (int a = kNumActions - 1; a >= 0; --a)
    if (dist[a] > 0.0) return static_cast<Action>(a);
  return Action::Up;
}

}  // namespace

std::vector<Episode> simulate_episodes(const LabelledMdp& mdp, const TaskAutomaton& hidden_ta, const Policy& policy,
                                       int episode_len, int n_episodes, std::uint64_t seed) {
  if (episode_len < 1) throw PreconditionError("episode length must be at least 1");
  if (n_episodes < 0) throw PreconditionError("episode count must be non-negative");
  if (policy.action_distribution.size() != static_cast<std::size_t>(mdp.num_states())) {
    throw PreconditionError("policy does not cover every state");
  }
  hidden_ta.validate();

  // Symbol index of each state's label in the automaton alphabet, if present.
  std::vector<std::optional<std::size_t>> symbol_of(mdp.num_states());
  for (StateId s = 0; s < mdp.num_states(); ++s) symbol_of[s] = hidden_ta.alphabet.find(mdp.label(s));

  std::vector<Episode> episodes(n_episodes);
  for (int i = 0; i < n_episodes; ++i) {
    auto rng = substream(seed, static_cast<std::uint64_t>(i));
    Episode& ep = episodes[i];
    ep.states.reserve(episode_len + 1);
    StateId s = mdp.initial_state();
    StateId q = hidden_ta.initial;
    ep.states.push_back(s);
    ep.trace.push_back(mdp.label(s));
    ep.rewards.push_back(hidden_ta.accepting[q] ? 1 : 0);
    for (int t = 1; t <= episode_len; ++t) {
      s = mdp.successor(s, sample_action(policy.action_distribution[s], rng));
      const auto& sym = symbol_of[s];
      StateId next = sym ? hidden_ta.delta[q][*sym] : kNoState;
      if (next == kNoState) {
        throw SimulationError("task automaton has no transition from " + hidden_ta.name(q) + " on label '" +
                              mdp.label(s).str() + "'");
      }
      q = next;
      ep.states.push_back(s);
      ep.trace.push_back(mdp.label(s));
      ep.rewards.push_back(hidden_ta.accepting[q] ? 1 : 0);
    }
  }
  return episodes;
}

double reward_fraction(std::span<const Episode> episodes) {
  if (episodes.empty()) return 0.0;
  std::size_t rewarded = 0;
  for (const auto& ep : episodes) rewarded += std::any_of(ep.rewards.begin(), ep.rewards.end(), [](int r) { return r; });
  return static_cast<double>(rewarded) / static_cast<double>(episodes.size());
}

void validate_episodes(const LabelledMdp& mdp, std::span<const Episode> episodes) {
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    const std::string where = "episode " + std::to_string(i) + ": ";
    if (ep.states.empty()) throw PreconditionError(where + "empty episode");
    if (ep.trace.size() != ep.states.size() || ep.rewards.size() != ep.states.size()) {
      throw PreconditionError(where + "state, trace and reward rows differ in length");
    }
    for (std::size_t t = 0; t < ep.states.size(); ++t) {
      if (ep.states[t] < 0 || ep.states[t] >= mdp.num_states()) throw PreconditionError(where + "state out of range");
      if (ep.trace[t] != mdp.label(ep.states[t])) {
        throw PreconditionError(where + "trace does not match the state labels at step " + std::to_string(t));
      }
      if (ep.rewards[t] != 0 && ep.rewards[t] != 1) throw PreconditionError(where + "rewards must be 0 or 1");
    }
  }
}

// ---------------------------------------------------------------------------
// Grid files

namespace {

std::vector<std::string> tokens_of(std::string line) {
  if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string t; ss >> t;) out.push_back(t);
  return out;
}

int parse_int(const std::string& s, std::size_t line) {
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ParseError("expected an integer, got '" + s + "'", line);
  return v;
}

}  // namespace

LabelledMdp read_grid(std::istream& in) {
  std::optional<std::pair<int, int>> size;
  std::optional<Cell> initial;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> row_lines;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto tok = tokens_of(line);
    if (tok.empty()) continue;
    if (tok[0] == "size") {
      if (tok.size() != 3) throw ParseError("size expects 'size <width> <height>'", lineno);
      if (size) throw ParseError("duplicate size line", lineno);
      size.emplace(parse_int(tok[1], lineno), parse_int(tok[2], lineno));
      if (size->first < 1 || size->second < 1) throw ParseError("grid dimensions must be positive", lineno);
    } else if (tok[0] == "initial") {
      if (tok.size() != 3) throw ParseError("initial expects 'initial <x> <y>'", lineno);
      initial = Cell{parse_int(tok[1], lineno), parse_int(tok[2], lineno)};
    } else {
      if (!size) throw ParseError("grid rows must follow the size line", lineno);
      if (static_cast<int>(tok.size()) != size->first) {
        throw ParseError("expected " + std::to_string(size->first) + " cells, got " + std::to_string(tok.size()),
                         lineno);
      }
      rows.push_back(std::move(tok));
      row_lines.push_back(lineno);
    }
  }
  if (!size) throw ParseError("missing size line", lineno);
  if (!initial) throw ParseError("missing initial line", lineno);
  const auto [width, height] = *size;
  if (static_cast<int>(rows.size()) != height) {
    throw ParseError("expected " + std::to_string(height) + " grid rows, got " + std::to_string(rows.size()), lineno);
  }
  std::vector<std::pair<Cell, Label>> cells;
  for (int r = 0; r < height; ++r) {
    const int y = height - 1 - r;
    for (int x = 0; x < width; ++x) {
      try {
        Label l = Label::parse(rows[r][x]);
        if (!l.empty()) cells.emplace_back(Cell{x, y}, std::move(l));
      } catch (const PreconditionError& e) {
        throw ParseError(e.what(), row_lines[r]);
      }
    }
  }
  if (initial->x < 0 || initial->y < 0 || initial->x >= width || initial->y >= height) {
    throw ParseError("initial cell is outside the grid", 0);
  }
  return build_gridworld(width, height, cells, *initial);
}

void write_grid(std::ostream& out, const LabelledMdp& mdp) {
  const Cell init = mdp.cell(mdp.initial_state());
  out << "size " << mdp.width() << ' ' << mdp.height() << '\n' << "initial " << init.x << ' ' << init.y << '\n';
  for (int y = mdp.height() - 1; y >= 0; --y) {
    for (int x = 0; x < mdp.width(); ++x) out << (x ? " " : "") << mdp.label(mdp.index({x, y})).str();
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Episode files

void write_episodes(std::ostream& out, std::span<const Episode> episodes) {
  for (std::size_t i = 0; i < episodes.size(); ++i) {
    const Episode& ep = episodes[i];
    if (i) out << '\n';
    for (std::size_t t = 0; t < ep.states.size(); ++t) out << (t ? " " : "") << ep.states[t];
    out << '\n';
    for (std::size_t t = 0; t < ep.trace.size(); ++t) out << (t ? " " : "") << ep.trace[t].str();
    out << '\n';
    for (std::size_t t = 0; t < ep.rewards.size(); ++t) out << (t ? " " : "") << ep.rewards[t];
    out << '\n';
  }
}

std::vector<Episode> read_episodes(std::istream& in) {
  std::vector<Episode> episodes;
  std::vector<std::pair<std::vector<std::string>, std::size_t>> record;
  std::string line;
  std::size_t lineno = 0;

  auto flush = [&]() {
    if (record.empty()) return;
    if (record.size() != 3) {
      throw ParseError("episode record needs exactly three rows, got " + std::to_string(record.size()),
                       record.front().second);
    }
    const std::size_t n = record[0].first.size();
    for (const auto& [row, at] : record)
      if (row.size() != n) throw ParseError("episode rows have different lengths", at);
    Episode ep;
    for (const auto& tok : record[0].first) ep.states.push_back(parse_int(tok, record[0].second));
    try {
      for (const auto& tok : record[1].first) ep.trace.push_back(Label::parse(tok));
    } catch (const PreconditionError& e) {
      throw ParseError(e.what(), record[1].second);
    }
    for (const auto& tok : record[2].first) {
      int r = parse_int(tok, record[2].second);
      if (r != 0 && r != 1) throw ParseError("rewards must be 0 or 1", record[2].second);
      ep.rewards.push_back(r);
    }
    episodes.push_back(std::move(ep));
    record.clear();
  };

  while (std::getline(in, line)) {
    ++lineno;
    auto tok = tokens_of(line);
    if (tok.empty()) {
      flush();
      continue;
    }
    record.emplace_back(std::move(tok), lineno);
    if (record.size() > 3) throw ParseError("episode record has more than three rows", lineno);
  }
  flush();
  return episodes;
}

}  // namespace talearn
