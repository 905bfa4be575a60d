#include "talearn/automata.hpp"

#include <algorithm>
#include <deque>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "talearn/errors.hpp"

namespace talearn {

// ---------------------------------------------------------------------------
// Nfa / Dfa members

StateId Nfa::add_state(std::string name, bool accept) {
  delta.emplace_back(alphabet.size());
  accepting.push_back(accept);
  names.push_back(std::move(name));
  return static_cast<StateId>(delta.size() - 1);
}

void Nfa::add_transition(StateId src, std::size_t symbol, StateId dst) {
  auto& targets = delta.at(src).at(symbol);
  auto it = std::lower_bound(targets.begin(), targets.end(), dst);
  if (it == targets.end() || *it != dst) targets.insert(it, dst);
}

void Nfa::add_transition(StateId src, const Label& symbol, StateId dst) {
  add_transition(src, alphabet.index(symbol), dst);
}

bool Nfa::is_deterministic() const {
  for (const auto& row : delta)
    for (const auto& t : row)
      if (t.size() > 1) return false;
  return true;
}

std::size_t Nfa::num_transitions() const {
  std::size_t n = 0;
  for (const auto& row : delta)
    for (const auto& t : row) n += t.size();
  return n;
}

std::string Nfa::name(StateId q) const {
  if (static_cast<std::size_t>(q) < names.size() && !names[q].empty()) return names[q];
  return "q" + std::to_string(q);
}

void Nfa::validate() const {
  const auto n = static_cast<StateId>(size());
  if (n == 0) throw PreconditionError("automaton has no states");
  if (initial < 0 || initial >= n) throw PreconditionError("initial state out of range");
  if (accepting.size() != size()) throw PreconditionError("accepting flags do not match state count");
  for (const auto& row : delta) {
    if (row.size() != alphabet.size()) throw PreconditionError("transition row width differs from alphabet size");
    for (const auto& t : row)
      for (StateId d : t)
        if (d < 0 || d >= n) throw PreconditionError("transition target out of range");
  }
}

StateId Dfa::add_state(std::string name, bool accept) {
  delta.emplace_back(alphabet.size(), kNoState);
  accepting.push_back(accept);
  names.push_back(std::move(name));
  return static_cast<StateId>(delta.size() - 1);
}

void Dfa::set_transition(StateId src, std::size_t symbol, StateId dst) {
  auto& slot = delta.at(src).at(symbol);
  if (slot != kNoState && slot != dst) {
    throw PreconditionError("conflicting transition from " + name(src) + " on " + alphabet[symbol].str());
  }
  slot = dst;
}

void Dfa::set_transition(StateId src, const Label& symbol, StateId dst) {
  set_transition(src, alphabet.index(symbol), dst);
}

bool Dfa::is_complete() const {
  for (const auto& row : delta)
    for (StateId t : row)
      if (t == kNoState) return false;
  return true;
}

std::string Dfa::name(StateId q) const {
  if (static_cast<std::size_t>(q) < names.size() && !names[q].empty()) return names[q];
  return "q" + std::to_string(q);
}

void Dfa::validate() const {
  const auto n = static_cast<StateId>(size());
  if (n == 0) throw PreconditionError("automaton has no states");
  if (initial < 0 || initial >= n) throw PreconditionError("initial state out of range");
  if (accepting.size() != size()) throw PreconditionError("accepting flags do not match state count");
  for (const auto& row : delta) {
    if (row.size() != alphabet.size()) throw PreconditionError("transition row width differs from alphabet size");
    for (StateId d : row)
      if (d != kNoState && (d < 0 || d >= n)) throw PreconditionError("transition target out of range");
  }
}

std::vector<Label> Dfa::labels_in_use() const {
  std::vector<Label> used;
  for (std::size_t a = 0; a < alphabet.size(); ++a) {
    for (std::size_t q = 0; q < size(); ++q) {
      if (delta[q][a] != kNoState && delta[q][a] != static_cast<StateId>(q)) {
        used.push_back(alphabet[a]);
        break;
      }
    }
  }
  return used;
}

// ---------------------------------------------------------------------------
// Runs

RunResult run(const Dfa& dfa, std::span<const Label> word) {
  StateId q = dfa.initial;
  for (const Label& l : word) {
    std::size_t a = dfa.alphabet.index(l);
    q = dfa.delta[q][a];
    if (q == kNoState) return {kNoState, false};
  }
  return {q, static_cast<bool>(dfa.accepting[q])};
}

bool accepts(const Nfa& nfa, std::span<const Label> word) {
  std::vector<char> current(nfa.size(), 0);
  current[nfa.initial] = 1;
  for (const Label& l : word) {
    std::size_t a = nfa.alphabet.index(l);
    std::vector<char> next(nfa.size(), 0);
    bool any = false;
    for (std::size_t q = 0; q < nfa.size(); ++q) {
      if (!current[q]) continue;
      for (StateId t : nfa.delta[q][a]) {
        next[t] = 1;
        any = true;
      }
    }
    if (!any) return false;
    current.swap(next);
  }
  for (std::size_t q = 0; q < nfa.size(); ++q)
    if (current[q] && nfa.accepting[q]) return true;
  return false;
}

// ---------------------------------------------------------------------------
// Completion

Dfa complete(Dfa dfa, Completion policy) {
  if (dfa.is_complete()) return dfa;
  StateId sink = kNoState;
  if (policy == Completion::Sink) {
    sink = dfa.add_state("sink", false);
    for (std::size_t a = 0; a < dfa.alphabet.size(); ++a) dfa.delta[sink][a] = sink;
  }
  for (std::size_t q = 0; q < dfa.size(); ++q)
    for (auto& t : dfa.delta[q])
      if (t == kNoState) t = policy == Completion::SelfLoop ? static_cast<StateId>(q) : sink;
  return dfa;
}

Nfa complete(Nfa nfa, Completion policy) {
  bool missing = false;
  for (const auto& row : nfa.delta)
    for (const auto& t : row) missing = missing || t.empty();
  if (!missing) return nfa;
  StateId sink = kNoState;
  if (policy == Completion::Sink) {
    sink = nfa.add_state("sink", false);
    for (std::size_t a = 0; a < nfa.alphabet.size(); ++a) nfa.delta[sink][a] = {sink};
  }
  for (std::size_t q = 0; q < nfa.size(); ++q)
    for (auto& t : nfa.delta[q])
      if (t.empty()) t = {policy == Completion::SelfLoop ? static_cast<StateId>(q) : sink};
  return nfa;
}

Dfa extend_alphabet(const Dfa& dfa, const Alphabet& alphabet, Completion policy) {
  if (!alphabet.includes(dfa.alphabet)) {
    throw PreconditionError("target alphabet must include the automaton's alphabet");
  }
  Dfa out(alphabet);
  for (std::size_t q = 0; q < dfa.size(); ++q) out.add_state(dfa.names[q], dfa.accepting[q]);
  out.initial = dfa.initial;
  std::vector<bool> is_new(alphabet.size(), true);
  for (std::size_t a = 0; a < dfa.alphabet.size(); ++a) {
    std::size_t b = alphabet.index(dfa.alphabet[a]);
    is_new[b] = false;
    for (std::size_t q = 0; q < dfa.size(); ++q) out.delta[q][b] = dfa.delta[q][a];
  }
  StateId sink = kNoState;
  for (std::size_t b = 0; b < alphabet.size(); ++b) {
    if (!is_new[b]) continue;
    if (policy == Completion::Sink && sink == kNoState) {
      sink = out.add_state("sink", false);
      for (auto& t : out.delta[sink]) t = sink;
    }
    for (std::size_t q = 0; q < out.size(); ++q)
      if (out.delta[q][b] == kNoState)
        out.delta[q][b] = policy == Completion::SelfLoop ? static_cast<StateId>(q) : sink;
  }
  return out;
}

Nfa to_nfa(const Dfa& dfa) {
  Nfa out(dfa.alphabet);
  for (std::size_t q = 0; q < dfa.size(); ++q) out.add_state(dfa.names[q], dfa.accepting[q]);
  out.initial = dfa.initial;
  for (std::size_t q = 0; q < dfa.size(); ++q)
    for (std::size_t a = 0; a < dfa.alphabet.size(); ++a)
      if (dfa.delta[q][a] != kNoState) out.delta[q][a] = {dfa.delta[q][a]};
  return out;
}

// ---------------------------------------------------------------------------
// Determinization

Dfa subset_construction(const Nfa& nfa) {
  nfa.validate();
  Dfa out(nfa.alphabet);
  std::map<std::vector<StateId>, StateId> index;
  std::deque<std::vector<StateId>> work;

  auto intern = [&](std::vector<StateId> subset) {
    auto it = index.find(subset);
    if (it != index.end()) return it->second;
    bool accept = false;
    std::string name = "{";
    for (std::size_t i = 0; i < subset.size(); ++i) {
      accept = accept || nfa.accepting[subset[i]];
      name += (i ? "," : "") + nfa.name(subset[i]);
    }
    name += "}";
    StateId id = out.add_state(std::move(name), accept);
    index.emplace(subset, id);
    work.push_back(std::move(subset));
    return id;
  };

  out.initial = intern({nfa.initial});
  while (!work.empty()) {
    std::vector<StateId> subset = std::move(work.front());
    work.pop_front();
    StateId src = index.at(subset);
    for (std::size_t a = 0; a < nfa.alphabet.size(); ++a) {
      std::vector<StateId> next;
      for (StateId q : subset) next.insert(next.end(), nfa.delta[q][a].begin(), nfa.delta[q][a].end());
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      StateId dst = intern(std::move(next));
      out.delta[src][a] = dst;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Minimization

namespace {

std::vector<StateId> bfs_order(const Dfa& dfa) {
  std::vector<StateId> order;
  std::vector<char> seen(dfa.size(), 0);
  std::deque<StateId> queue{dfa.initial};
  seen[dfa.initial] = 1;
  while (!queue.empty()) {
    StateId q = queue.front();
    queue.pop_front();
    order.push_back(q);
    for (StateId t : dfa.delta[q]) {
      if (t != kNoState && !seen[t]) {
        seen[t] = 1;
        queue.push_back(t);
      }
    }
  }
  return order;
}

/// Builds the quotient of `dfa` by `block_of` (a congruence), numbered in BFS order.
Dfa quotient_bfs(const Dfa& dfa, const std::vector<int>& block_of, int num_blocks) {
  std::vector<StateId> rep(num_blocks, kNoState);
  for (std::size_t q = 0; q < dfa.size(); ++q)
    if (block_of[q] >= 0 && rep[block_of[q]] == kNoState) rep[block_of[q]] = static_cast<StateId>(q);

  Dfa out(dfa.alphabet);
  std::vector<StateId> new_id(num_blocks, kNoState);
  std::deque<int> queue;
  auto visit = [&](int b) {
    if (new_id[b] != kNoState) return new_id[b];
    std::string name;
    for (std::size_t q = 0; q < dfa.size(); ++q) {
      if (block_of[q] != b) continue;
      name += (name.empty() ? "" : "|") + dfa.name(static_cast<StateId>(q));
    }
    new_id[b] = out.add_state(std::move(name), dfa.accepting[rep[b]]);
    queue.push_back(b);
    return new_id[b];
  };
  out.initial = visit(block_of[dfa.initial]);
  while (!queue.empty()) {
    int b = queue.front();
    queue.pop_front();
    StateId q = rep[b];
    for (std::size_t a = 0; a < dfa.alphabet.size(); ++a) {
      StateId t = dfa.delta[q][a];
      out.delta[new_id[b]][a] = t == kNoState ? kNoState : visit(block_of[t]);
    }
  }
  return out;
}

}  // namespace

Dfa minimize_partial(const Dfa& input) {
  input.validate();
  const Dfa dfa = trim(input);
  const std::size_t n = dfa.size();
  const std::size_t m = dfa.alphabet.size();

  // incompatible[p][q]: some word defined from both p and q separates their acceptance.
  std::vector<std::vector<char>> incompatible(n, std::vector<char>(n, 0));
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = 0; q < n; ++q) incompatible[p][q] = dfa.accepting[p] != dfa.accepting[q];
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (incompatible[p][q]) continue;
        for (std::size_t a = 0; a < m; ++a) {
          const StateId tp = dfa.delta[p][a], tq = dfa.delta[q][a];
          if (tp != kNoState && tq != kNoState && incompatible[tp][tq]) {
            incompatible[p][q] = incompatible[q][p] = 1;
            changed = true;
            break;
          }
        }
      }
  }

  std::vector<int> block(n);
  std::iota(block.begin(), block.end(), 0);
  // Merges the blocks of p and q plus everything determinism forces; false (and no
  // change) when some resulting block holds two incompatible states.
  auto try_merge = [&](StateId p, StateId q) {
    std::vector<int> trial = block;
    auto relabel = [&](int from, int to) {
      for (auto& b : trial)
        if (b == from) b = to;
    };
    std::vector<std::pair<StateId, StateId>> pending{{p, q}};
    while (!pending.empty()) {
      auto [x, y] = pending.back();
      pending.pop_back();
      int bx = trial[x], by = trial[y];
      if (bx == by) continue;
      if (by < bx) std::swap(bx, by);
      for (std::size_t u = 0; u < n; ++u) {
        if (trial[u] != bx) continue;
        for (std::size_t v = 0; v < n; ++v)
          if (trial[v] == by && incompatible[u][v]) return false;
      }
      relabel(by, bx);
      for (std::size_t a = 0; a < m; ++a) {
        StateId first = kNoState;
        for (std::size_t u = 0; u < n; ++u) {
          if (trial[u] != bx || dfa.delta[u][a] == kNoState) continue;
          if (first == kNoState) {
            first = dfa.delta[u][a];
          } else if (trial[first] != trial[dfa.delta[u][a]]) {
            pending.emplace_back(first, dfa.delta[u][a]);
          }
        }
      }
    }
    block = std::move(trial);
    return true;
  };
  for (std::size_t p = 0; p < n; ++p)
    for (std::size_t q = p + 1; q < n; ++q)
      if (block[p] != block[q] && !incompatible[p][q]) try_merge(static_cast<StateId>(p), static_cast<StateId>(q));

  // Quotient with the union of the members' defined transitions, numbered breadth-first.
  Dfa out(dfa.alphabet);
  std::vector<StateId> id(n, kNoState);
  std::deque<int> queue;
  auto visit = [&](int b) {
    if (id[b] != kNoState) return id[b];
    std::string name;
    bool accept = false;
    for (std::size_t q = 0; q < n; ++q) {
      if (block[q] != b) continue;
      name += (name.empty() ? "" : "|") + dfa.name(static_cast<StateId>(q));
      accept = dfa.accepting[q];
    }
    id[b] = out.add_state(std::move(name), accept);
    queue.push_back(b);
    return id[b];
  };
  out.initial = visit(block[dfa.initial]);
  while (!queue.empty()) {
    const int b = queue.front();
    queue.pop_front();
    for (std::size_t q = 0; q < n; ++q) {
      if (block[q] != b) continue;
      for (std::size_t a = 0; a < m; ++a)
        if (dfa.delta[q][a] != kNoState) out.delta[id[b]][a] = visit(block[dfa.delta[q][a]]);
    }
  }
  return out;
}

Dfa trim(const Dfa& dfa) {
  dfa.validate();
  std::vector<int> block_of(dfa.size(), -1);
  auto order = bfs_order(dfa);
  for (std::size_t i = 0; i < order.size(); ++i) block_of[order[i]] = static_cast<int>(i);
  Dfa out = quotient_bfs(dfa, block_of, static_cast<int>(order.size()));
  for (std::size_t i = 0; i < order.size(); ++i) out.names[i] = dfa.names[order[i]];
  return out;
}

Dfa minimize(const Dfa& input) {
  input.validate();
  if (!input.is_complete()) throw PreconditionError("minimize requires a complete DFA");
  const Dfa dfa = trim(input);
  const std::size_t n = dfa.size();
  const std::size_t m = dfa.alphabet.size();

  // inverse[a][q] = predecessors of q on a
  std::vector<std::vector<std::vector<StateId>>> inverse(m, std::vector<std::vector<StateId>>(n));
  for (std::size_t q = 0; q < n; ++q)
    for (std::size_t a = 0; a < m; ++a) inverse[a][dfa.delta[q][a]].push_back(static_cast<StateId>(q));

  std::vector<int> block_of(n);
  std::vector<std::vector<StateId>> blocks;
  {
    std::vector<StateId> acc, rej;
    for (std::size_t q = 0; q < n; ++q) (dfa.accepting[q] ? acc : rej).push_back(static_cast<StateId>(q));
    for (auto* b : {&rej, &acc}) {
      if (b->empty()) continue;
      for (StateId q : *b) block_of[q] = static_cast<int>(blocks.size());
      blocks.push_back(std::move(*b));
    }
  }

  std::deque<std::pair<int, std::size_t>> work;
  std::vector<std::vector<char>> in_work;
  auto push = [&](int b, std::size_t a) {
    if (in_work[b][a]) return;
    in_work[b][a] = 1;
    work.emplace_back(b, a);
  };
  in_work.assign(blocks.size(), std::vector<char>(m, 0));
  if (blocks.size() == 2) {
    int smaller = blocks[0].size() <= blocks[1].size() ? 0 : 1;
    for (std::size_t a = 0; a < m; ++a) push(smaller, a);
  }

  std::vector<char> marked(n, 0);
  while (!work.empty()) {
    auto [splitter, a] = work.front();
    work.pop_front();
    in_work[splitter][a] = 0;

    std::vector<StateId> preimage;
    for (StateId q : blocks[splitter])
      for (StateId p : inverse[a][q])
        if (!marked[p]) {
          marked[p] = 1;
          preimage.push_back(p);
        }

    std::map<int, std::vector<StateId>> touched;
    for (StateId p : preimage) touched[block_of[p]].push_back(p);
    for (auto& [y, inside] : touched) {
      if (inside.size() == blocks[y].size()) continue;
      std::vector<StateId> outside;
      for (StateId q : blocks[y])
        if (!marked[q]) outside.push_back(q);
      const int z = static_cast<int>(blocks.size());
      for (StateId q : inside) block_of[q] = z;
      blocks[y] = std::move(outside);
      blocks.push_back(inside);
      in_work.emplace_back(m, 0);
      for (std::size_t c = 0; c < m; ++c) {
        if (in_work[y][c]) {
          push(z, c);
        } else {
          push(blocks[z].size() < blocks[y].size() ? z : y, c);
        }
      }
    }
    for (StateId p : preimage) marked[p] = 0;
  }
  return quotient_bfs(dfa, block_of, static_cast<int>(blocks.size()));
}

// ---------------------------------------------------------------------------
// Equivalence

namespace {

void require_same_alphabet(const Dfa& a, const Dfa& b) {
  if (!(a.alphabet == b.alphabet)) throw PreconditionError("automata have different alphabets");
}

/// Breadth-first search over the synchronous product; kNoState is a shared rejecting sink.
struct ProductSearch {
  std::vector<const Dfa*> parts;

  static StateId step(const Dfa& d, StateId q, std::size_t a) {
    return q == kNoState ? kNoState : d.delta[q][a];
  }
  static bool accepting(const Dfa& d, StateId q) { return q != kNoState && d.accepting[q]; }

  std::uint64_t key(const std::vector<StateId>& tuple) const {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < parts.size(); ++i) k = k * (parts[i]->size() + 1) + static_cast<std::uint64_t>(tuple[i] + 1);
    return k;
  }

  /// Returns the shortest word reaching a tuple satisfying `bad`, or nullopt.
  template <typename Pred>
  std::optional<std::vector<std::size_t>> find(Pred bad) const {
    std::vector<StateId> start;
    for (const Dfa* d : parts) start.push_back(d->initial);
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::size_t>> parent;
    std::deque<std::vector<StateId>> queue{start};
    parent.emplace(key(start), std::make_pair(key(start), std::size_t(-1)));
    const std::size_t m = parts.front()->alphabet.size();
    while (!queue.empty()) {
      auto tuple = std::move(queue.front());
      queue.pop_front();
      if (bad(tuple)) {
        std::vector<std::size_t> word;
        std::uint64_t k = key(tuple);
        while (true) {
          auto [p, sym] = parent.at(k);
          if (sym == std::size_t(-1)) break;
          word.push_back(sym);
          k = p;
        }
        std::reverse(word.begin(), word.end());
        return word;
      }
      for (std::size_t a = 0; a < m; ++a) {
        std::vector<StateId> next(tuple.size());
        bool all_dead = true;
        for (std::size_t i = 0; i < parts.size(); ++i) {
          next[i] = step(*parts[i], tuple[i], a);
          all_dead = all_dead && next[i] == kNoState;
        }
        if (all_dead) continue;
        if (parent.emplace(key(next), std::make_pair(key(tuple), a)).second) queue.push_back(std::move(next));
      }
    }
    return std::nullopt;
  }
};

}  // namespace

bool language_equivalent(const Dfa& a, const Dfa& b) { return !distinguishing_word(a, b).has_value(); }

std::optional<std::vector<Label>> distinguishing_word(const Dfa& a, const Dfa& b) {
  a.validate();
  b.validate();
  require_same_alphabet(a, b);
  ProductSearch search{{&a, &b}};
  auto word = search.find([&](const std::vector<StateId>& t) {
    return ProductSearch::accepting(a, t[0]) != ProductSearch::accepting(b, t[1]);
  });
  if (!word) return std::nullopt;
  std::vector<Label> out;
  for (std::size_t s : *word) out.push_back(a.alphabet[s]);
  return out;
}

bool language_equivalent_within(const Dfa& a, const Dfa& b, const Dfa& domain) {
  a.validate();
  b.validate();
  domain.validate();
  require_same_alphabet(a, b);
  require_same_alphabet(a, domain);
  ProductSearch search{{&a, &b, &domain}};
  return !search
              .find([&](const std::vector<StateId>& t) {
                return ProductSearch::accepting(domain, t[2]) &&
                       ProductSearch::accepting(a, t[0]) != ProductSearch::accepting(b, t[1]);
              })
              .has_value();
}

bool isomorphic(const Dfa& a, const Dfa& b) {
  if (!(a.alphabet == b.alphabet) || a.size() != b.size()) return false;
  std::vector<StateId> map_ab(a.size(), kNoState), map_ba(b.size(), kNoState);
  std::deque<std::pair<StateId, StateId>> queue{{a.initial, b.initial}};
  map_ab[a.initial] = b.initial;
  map_ba[b.initial] = a.initial;
  std::size_t mapped = 1;
  while (!queue.empty()) {
    auto [p, q] = queue.front();
    queue.pop_front();
    if (a.accepting[p] != b.accepting[q]) return false;
    for (std::size_t s = 0; s < a.alphabet.size(); ++s) {
      StateId pt = a.delta[p][s], qt = b.delta[q][s];
      if ((pt == kNoState) != (qt == kNoState)) return false;
      if (pt == kNoState) continue;
      if (map_ab[pt] == kNoState && map_ba[qt] == kNoState) {
        map_ab[pt] = qt;
        map_ba[qt] = pt;
        ++mapped;
        queue.emplace_back(pt, qt);
      } else if (map_ab[pt] != qt || map_ba[qt] != pt) {
        return false;
      }
    }
  }
  return mapped == a.size();
}

// ---------------------------------------------------------------------------
// DOT

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

template <typename EdgeFn>
std::string dot_common(std::size_t n, StateId initial, const std::vector<bool>& accepting,
                       const std::function<std::string(StateId)>& name, const std::string& graph, EdgeFn edges) {
  std::ostringstream out;
  out << "digraph \"" << escape(graph) << "\" {\n  rankdir=LR;\n  node [shape=circle];\n"
      << "  __start [shape=point];\n  __start -> " << initial << ";\n";
  for (std::size_t q = 0; q < n; ++q) {
    out << "  " << q << " [label=\"" << escape(name(static_cast<StateId>(q))) << "\"";
    if (accepting[q]) out << ", shape=doublecircle";
    out << "];\n";
  }
  // Parallel edges are drawn once with a comma-separated label list.
  std::map<std::pair<StateId, StateId>, std::vector<std::string>> grouped;
  edges([&](StateId src, StateId dst, const Label& l) { grouped[{src, dst}].push_back(l.pretty()); });
  for (const auto& [ends, labels] : grouped) {
    std::string text;
    for (std::size_t i = 0; i < labels.size(); ++i) text += (i ? ", " : "") + labels[i];
    out << "  " << ends.first << " -> " << ends.second << " [label=\"" << escape(text) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace

std::string to_dot(const Dfa& dfa, const std::string& graph_name) {
  return dot_common(dfa.size(), dfa.initial, dfa.accepting, [&](StateId q) { return dfa.name(q); }, graph_name,
                    [&](auto emit) {
                      for (std::size_t q = 0; q < dfa.size(); ++q)
                        for (std::size_t a = 0; a < dfa.alphabet.size(); ++a)
                          if (dfa.delta[q][a] != kNoState)
                            emit(static_cast<StateId>(q), dfa.delta[q][a], dfa.alphabet[a]);
                    });
}

std::string to_dot(const Nfa& nfa, const std::string& graph_name) {
  return dot_common(nfa.size(), nfa.initial, nfa.accepting, [&](StateId q) { return nfa.name(q); }, graph_name,
                    [&](auto emit) {
                      for (std::size_t q = 0; q < nfa.size(); ++q)
                        for (std::size_t a = 0; a < nfa.alphabet.size(); ++a)
                          for (StateId t : nfa.delta[q][a]) emit(static_cast<StateId>(q), t, nfa.alphabet[a]);
                    });
}

// ---------------------------------------------------------------------------
// Text format

namespace {

bool valid_state_token(const std::string& s) {
  static const std::set<std::string> keywords{"alphabet", "states", "initial", "accepting"};
  return !s.empty() && !keywords.count(s) && s.find_first_of(" \t\r\n#") == std::string::npos;
}

/// State names for the text format; falls back to q0..qn when names are unusable as tokens.
std::vector<std::string> text_names(std::size_t n, const std::function<std::string(StateId)>& name) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  bool usable = true;
  for (std::size_t q = 0; q < n; ++q) {
    std::string s = name(static_cast<StateId>(q));
    if (!valid_state_token(s) || !seen.insert(s).second) usable = false;
    out.push_back(std::move(s));
  }
  if (!usable)
    for (std::size_t q = 0; q < n; ++q) out[q] = "q" + std::to_string(q);
  return out;
}

template <typename EdgeFn>
void write_common(std::ostream& out, const Alphabet& sigma, std::size_t n, StateId initial,
                  const std::vector<bool>& accepting, const std::vector<std::string>& names, EdgeFn edges) {
  out << "alphabet";
  for (const auto& l : sigma) out << ' ' << l.str();
  out << "\nstates";
  for (const auto& s : names) out << ' ' << s;
  out << "\ninitial " << names[initial] << "\naccepting";
  for (std::size_t q = 0; q < n; ++q)
    if (accepting[q]) out << ' ' << names[q];
  out << '\n';
  edges([&](StateId src, const Label& l, StateId dst) {
    out << names[src] << ' ' << l.str() << ' ' << names[dst] << '\n';
  });
}

}  // namespace

void write_text(std::ostream& out, const Dfa& dfa) {
  dfa.validate();
  auto names = text_names(dfa.size(), [&](StateId q) { return dfa.name(q); });
  write_common(out, dfa.alphabet, dfa.size(), dfa.initial, dfa.accepting, names, [&](auto emit) {
    for (std::size_t q = 0; q < dfa.size(); ++q)
      for (std::size_t a = 0; a < dfa.alphabet.size(); ++a)
        if (dfa.delta[q][a] != kNoState) emit(static_cast<StateId>(q), dfa.alphabet[a], dfa.delta[q][a]);
  });
}

void write_text(std::ostream& out, const Nfa& nfa) {
  nfa.validate();
  auto names = text_names(nfa.size(), [&](StateId q) { return nfa.name(q); });
  write_common(out, nfa.alphabet, nfa.size(), nfa.initial, nfa.accepting, names, [&](auto emit) {
    for (std::size_t q = 0; q < nfa.size(); ++q)
      for (std::size_t a = 0; a < nfa.alphabet.size(); ++a)
        for (StateId t : nfa.delta[q][a]) emit(static_cast<StateId>(q), nfa.alphabet[a], t);
  });
}

Nfa read_nfa_text(std::istream& in) {
  std::optional<std::vector<Label>> alphabet;
  std::vector<std::string> states;
  std::optional<std::string> initial;
  std::vector<std::pair<std::string, std::size_t>> accepting;
  struct Edge {
    std::string src, dst;
    Label label;
    std::size_t line;
  };
  std::vector<Edge> edges;
  std::size_t header_line = 0;
  std::size_t initial_line = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::vector<std::string> tok;
    for (std::string t; ss >> t;) tok.push_back(t);
    if (tok.empty()) continue;
    try {
      if (tok[0] == "alphabet") {
        if (alphabet) throw ParseError("duplicate alphabet line", lineno);
        alphabet.emplace();
        for (std::size_t i = 1; i < tok.size(); ++i) alphabet->push_back(Label::parse(tok[i]));
      } else if (tok[0] == "states") {
        if (!states.empty()) throw ParseError("duplicate states line", lineno);
        if (tok.size() < 2) throw ParseError("states line lists no states", lineno);
        states.assign(tok.begin() + 1, tok.end());
        header_line = lineno;
      } else if (tok[0] == "initial") {
        if (tok.size() != 2) throw ParseError("initial expects exactly one state", lineno);
        initial = tok[1];
        initial_line = lineno;
      } else if (tok[0] == "accepting") {
        for (std::size_t i = 1; i < tok.size(); ++i) accepting.emplace_back(tok[i], lineno);
      } else if (tok.size() == 3) {
        edges.push_back({tok[0], tok[2], Label::parse(tok[1]), lineno});
      } else {
        throw ParseError("expected 'src symbol dst'", lineno);
      }
    } catch (const PreconditionError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (states.empty()) throw ParseError("missing states line", lineno);
  std::map<std::string, StateId> id;
  for (const auto& s : states) {
    if (!valid_state_token(s)) throw ParseError("invalid state name '" + s + "'", header_line);
    if (!id.emplace(s, static_cast<StateId>(id.size())).second)
      throw ParseError("duplicate state '" + s + "'", header_line);
  }
  if (!alphabet) {
    alphabet.emplace();
    for (const auto& e : edges) alphabet->push_back(e.label);
  }
  Nfa nfa{Alphabet(*alphabet)};
  for (const auto& s : states) nfa.add_state(s, false);
  if (!initial) throw ParseError("missing initial line", lineno);
  auto lookup = [&](const std::string& s, std::size_t at) {
    auto it = id.find(s);
    if (it == id.end()) throw ParseError("unknown state '" + s + "'", at);
    return it->second;
  };
  nfa.initial = lookup(*initial, initial_line);
  for (const auto& [s, at] : accepting) nfa.accepting[lookup(s, at)] = true;
  for (const auto& e : edges) {
    auto sym = nfa.alphabet.find(e.label);
    if (!sym) throw ParseError("symbol '" + e.label.str() + "' not in alphabet", e.line);
    nfa.add_transition(lookup(e.src, e.line), *sym, lookup(e.dst, e.line));
  }
  return nfa;
}

Dfa read_dfa_text(std::istream& in) {
  Nfa nfa = read_nfa_text(in);
  Dfa dfa(nfa.alphabet);
  for (std::size_t q = 0; q < nfa.size(); ++q) dfa.add_state(nfa.names[q], nfa.accepting[q]);
  dfa.initial = nfa.initial;
  for (std::size_t q = 0; q < nfa.size(); ++q) {
    for (std::size_t a = 0; a < nfa.alphabet.size(); ++a) {
      const auto& t = nfa.delta[q][a];
      if (t.size() > 1) {
        throw ParseError("state '" + nfa.name(static_cast<StateId>(q)) + "' has several successors on '" +
                             nfa.alphabet[a].str() + "'",
                         0);
      }
      if (!t.empty()) dfa.delta[q][a] = t.front();
    }
  }
  return dfa;
}

}  // namespace talearn
