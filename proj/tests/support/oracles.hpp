#pragma once

// Independent reference implementations used to check the library.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <set>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/hmm_learner.hpp"
#include "talearn/mdp_env.hpp"

namespace oracle {

using namespace talearn;

/// Direct NFA simulation over explicit state sets.
inline bool nfa_accepts(const Nfa& nfa, const std::vector<Label>& word) {
  std::set<StateId> current{nfa.initial};
  for (const Label& l : word) {
    auto sym = nfa.alphabet.find(l);
    if (!sym) return false;
    std::set<StateId> next;
    for (StateId q : current)
      for (StateId t : nfa.delta[q][*sym]) next.insert(t);
    current = std::move(next);
  }
  for (StateId q : current)
    if (nfa.accepting[q]) return true;
  return false;
}

/// Missing transitions reject.
inline bool dfa_accepts(const Dfa& dfa, const std::vector<Label>& word) {
  StateId q = dfa.initial;
  for (const Label& l : word) {
    auto sym = dfa.alphabet.find(l);
    if (!sym) return false;
    q = dfa.delta[q][*sym];
    if (q == kNoState) return false;
  }
  return dfa.accepting[q];
}

/// Every word over `alphabet` of length 0..max_len.
inline std::vector<std::vector<Label>> all_words(const Alphabet& alphabet, int max_len) {
  std::vector<std::vector<Label>> out{{}};
  std::size_t begin = 0;
  for (int len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (const Label& l : alphabet) {
        auto w = out[i];
        w.push_back(l);
        out.push_back(std::move(w));
      }
    begin = end;
  }
  return out;
}

inline Alphabet letters(int n) {
  std::vector<Label> ls;
  for (int i = 0; i < n; ++i) ls.emplace_back(std::string(1, static_cast<char>('a' + i)));
  return Alphabet(ls);
}

inline Nfa random_nfa(int states, int symbols, std::uint64_t seed, double density = 0.2) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Nfa nfa(letters(symbols));
  for (int q = 0; q < states; ++q) nfa.add_state("n" + std::to_string(q), u(rng) < 0.3);
  for (int q = 0; q < states; ++q)
    for (int a = 0; a < symbols; ++a)
      for (int t = 0; t < states; ++t)
        if (u(rng) < density) nfa.add_transition(q, static_cast<std::size_t>(a), t);
  return nfa;
}

inline Dfa random_dfa(int states, int symbols, std::uint64_t seed, double missing = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, states - 1);
  Dfa dfa(letters(symbols));
  for (int q = 0; q < states; ++q) dfa.add_state("d" + std::to_string(q), u(rng) < 0.4);
  for (int q = 0; q < states; ++q)
    for (int a = 0; a < symbols; ++a)
      if (u(rng) >= missing) dfa.set_transition(q, static_cast<std::size_t>(a), pick(rng));
  return dfa;
}

/// Σ over every hidden path of ρ(h0) E(h0,o0) Π P(h_{t-1},h_t) E(h_t,o_t).
inline double path_sum_probability(const HmmParams& p, const std::vector<int>& obs) {
  const int n = p.n_hidden();
  const std::size_t T = obs.size();
  std::vector<int> path(T, 0);
  double total = 0.0;
  while (true) {
    double prob = p.initial(path[0]) * p.emission(path[0], obs[0]);
    for (std::size_t t = 1; t < T && prob > 0.0; ++t)
      prob *= p.transition(path[t - 1], path[t]) * p.emission(path[t], obs[t]);
    total += prob;
    std::size_t i = 0;
    while (i < T && ++path[i] == n) path[i++] = 0;
    if (i == T) break;
  }
  return total;
}

struct Unscaled {
  std::vector<std::vector<double>> alpha, beta;
};

/// Textbook forward and backward recursions without scaling.
inline Unscaled unscaled_forward_backward(const HmmParams& p, const std::vector<int>& obs) {
  const int n = p.n_hidden();
  const std::size_t T = obs.size();
  Unscaled r{std::vector<std::vector<double>>(T, std::vector<double>(n, 0.0)),
             std::vector<std::vector<double>>(T, std::vector<double>(n, 0.0))};
  for (int i = 0; i < n; ++i) r.alpha[0][i] = p.initial(i) * p.emission(i, obs[0]);
  for (std::size_t t = 1; t < T; ++t)
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.alpha[t - 1][i] * p.transition(i, j);
      r.alpha[t][j] = s * p.emission(j, obs[t]);
    }
  for (int i = 0; i < n; ++i) r.beta[T - 1][i] = 1.0;
  for (std::size_t t = T - 1; t-- > 0;)
    for (int i = 0; i < n; ++i) {
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += p.transition(i, j) * p.emission(j, obs[t + 1]) * r.beta[t + 1][j];
      r.beta[t][i] = s;
    }
  return r;
}

/// Number of distinct positive-probability state sequences of 1..max_len+1 states from
/// `start` in the chain `m`.
inline std::size_t count_paths(const Matrix& m, int start, int max_len) {
  std::function<std::size_t(int, int)> go = [&](int s, int remaining) -> std::size_t {
    std::size_t n = 1;
    if (remaining == 0) return n;
    for (Eigen::Index t = 0; t < m.cols(); ++t)
      if (m(s, t) > 0.0) n += go(static_cast<int>(t), remaining - 1);
    return n;
  };
  return go(start, max_len);
}

/// Random grid of width/height in [2, max_side] with one to three cells labelled a/b/c.
inline LabelledMdp random_grid(std::uint64_t seed, int max_side = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> side(2, max_side);
  const int w = side(rng), h = side(rng);
  std::uniform_int_distribution<int> cx(0, w - 1), cy(0, h - 1), count(1, 3), prop(0, 2);
  std::vector<std::pair<Cell, Label>> cells;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    Cell c{cx(rng), cy(rng)};
    if (c.x == 0 && c.y == 0) continue;
    bool taken = false;
    for (const auto& [other, l] : cells) taken = taken || other == c;
    if (!taken) cells.emplace_back(c, Label(std::string(1, static_cast<char>('a' + prop(rng)))));
  }
  return build_gridworld(w, h, cells, Cell{0, 0});
}

/// Random complete task automaton with 2..max_states states over the grid's labels and
/// a/b/c. Non-final states advance on one or two labels; the last state is accepting
/// and absorbing; everything else self-loops.
inline TaskAutomaton random_task(std::uint64_t seed, const LabelledMdp& mdp, int max_states = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> size(2, max_states);
  const int k = size(rng);
  Alphabet sigma = mdp.label_alphabet().merged_with(letters(3));
  Dfa ta(sigma);
  for (int q = 0; q < k; ++q) ta.add_state("q" + std::to_string(q), q == k - 1);
  std::uniform_int_distribution<int> sym(0, static_cast<int>(sigma.size()) - 1), edges(1, 2);
  for (int q = 0; q + 1 < k; ++q) {
    const int e = edges(rng);
    for (int i = 0; i < e; ++i) {
      const auto a = static_cast<std::size_t>(sym(rng));
      if (sigma[a].empty() || ta.delta[q][a] != kNoState) continue;
      std::uniform_int_distribution<int> target(q + 1, k - 1);
      ta.set_transition(q, a, target(rng));
    }
  }
  return complete(ta, Completion::SelfLoop);
}

}  // namespace oracle
