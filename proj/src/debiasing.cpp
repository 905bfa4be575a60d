#include "talearn/debiasing.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "talearn/errors.hpp"

namespace talearn {

namespace {

int find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

bool unite(std::vector<int>& parent, int a, int b) {
  a = find(parent, a);
  b = find(parent, b);
  if (a == b) return false;
  if (b < a) std::swap(a, b);
  parent[b] = a;
  return true;
}

bool has_non_loop_edge(const Dfa& ta, std::size_t symbol) {
  for (std::size_t q = 0; q < ta.size(); ++q) {
    const StateId t = ta.delta[q][symbol];
    if (t != kNoState && t != static_cast<StateId>(q)) return true;
  }
  return false;
}

}  // namespace

bool is_consistent(const TaskAutomaton& ta, std::span<const Episode> episodes) {
  ta.validate();
  for (const auto& e : episodes) {
    StateId q = ta.initial;
    for (std::size_t t = 0; t < e.length(); ++t) {
      if (t > 0) {
        if (auto sym = ta.alphabet.find(e.trace[t])) {
          const StateId next = ta.delta[q][*sym];
          if (next != kNoState) q = next;
        }
      }
      if ((ta.accepting[q] ? 1 : 0) != e.rewards[t]) return false;
    }
  }
  return true;
}

TaskAutomaton merge_on_label(const TaskAutomaton& ta, const Label& label) {
  ta.validate();
  const auto sym = ta.alphabet.find(label);
  if (!sym) throw PreconditionError("label '" + label.str() + "' is not in the automaton's alphabet");
  const std::size_t n = ta.size();
  const std::size_t m = ta.alphabet.size();
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t q = 0; q < n; ++q) {
    const StateId t = ta.delta[q][*sym];
    if (t != kNoState) unite(parent, static_cast<int>(q), t);
  }
  // Self-loops are defaults that yield to explicit edges, so only classes reached by
  // two different non-loop edges on the same symbol must merge.
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::vector<int>> target(n, std::vector<int>(m, -1));
    for (std::size_t q = 0; q < n && !changed; ++q) {
      const int root = find(parent, static_cast<int>(q));
      for (std::size_t a = 0; a < m; ++a) {
        const StateId t = ta.delta[q][a];
        if (t == kNoState) continue;
        const int t_root = find(parent, t);
        if (t_root == root) continue;
        int& slot = target[root][a];
        if (slot < 0) {
          slot = t_root;
        } else if (slot != t_root) {
          unite(parent, slot, t_root);
          changed = true;
          break;
        }
      }
    }
  }

  TaskAutomaton out(ta.alphabet);
  std::vector<int> id(n, -1);
  std::vector<std::string> names(n);
  for (std::size_t q = 0; q < n; ++q) {
    const int root = find(parent, static_cast<int>(q));
    if (id[root] < 0) id[root] = out.add_state();
    names[id[root]] += (names[id[root]].empty() ? "" : "|") + ta.name(static_cast<StateId>(q));
    if (ta.accepting[q]) out.accepting[id[root]] = true;
  }
  for (std::size_t c = 0; c < out.size(); ++c) out.names[c] = names[c];
  out.initial = id[find(parent, ta.initial)];
  for (std::size_t q = 0; q < n; ++q) {
    const StateId src = id[find(parent, static_cast<int>(q))];
    for (std::size_t a = 0; a < m; ++a) {
      const StateId t = ta.delta[q][a];
      if (t == kNoState) continue;
      const StateId dst = id[find(parent, t)];
      if (dst != src || out.delta[src][a] == kNoState) out.delta[src][a] = dst;
    }
  }
  return out;
}

std::vector<Label> label_removal_order(const Alphabet& alphabet, std::span<const Episode> episodes) {
  std::map<Label, std::size_t> count;
  for (const auto& l : alphabet) count[l] = 0;
  for (const auto& e : episodes)
    for (std::size_t t = 1; t < e.trace.size(); ++t) {
      auto it = count.find(e.trace[t]);
      if (it != count.end()) ++it->second;
    }
  std::vector<Label> order(alphabet.begin(), alphabet.end());
  std::stable_sort(order.begin(), order.end(), [&](const Label& a, const Label& b) {
    if (count[a] != count[b]) return count[a] < count[b];
    return a.str() < b.str();
  });
  return order;
}

DebiasResult remove_environmental_bias_detailed(const TaskAutomaton& ta, std::span<const Episode> episodes) {
  if (!is_consistent(ta, episodes)) {
    throw PreconditionError("automaton is inconsistent with the episodes before de-biasing");
  }
  DebiasResult r;
  r.report.states_before = ta.size();
  TaskAutomaton current = minimize(complete(ta, Completion::SelfLoop));
  for (const Label& label : label_removal_order(current.alphabet, episodes)) {
    const std::size_t sym = current.alphabet.index(label);
    if (!has_non_loop_edge(current, sym)) continue;
    TaskAutomaton candidate = minimize(merge_on_label(current, label));
    if (is_consistent(candidate, episodes)) {
      current = std::move(candidate);
      r.report.removed.push_back(label);
    } else {
      r.report.kept.push_back(label);
    }
  }
  r.ta = minimize(current);
  r.report.states_after = r.ta.size();
  return r;
}

TaskAutomaton remove_environmental_bias(const TaskAutomaton& ta, std::span<const Episode> episodes) {
  return remove_environmental_bias_detailed(ta, episodes).ta;
}

std::string DebiasReport::to_text() const {
  std::ostringstream out;
  auto join = [](const std::vector<Label>& ls) {
    std::string s;
    for (const auto& l : ls) s += (s.empty() ? "" : " ") + l.str();
    return s;
  };
  out << "removed=" << join(removed) << '\n';
  out << "kept=" << join(kept) << '\n';
  out << "states_before=" << states_before << '\n';
  out << "states_after=" << states_after << '\n';
  return out.str();
}

}  // namespace talearn
