#include "talearn/digraph.hpp"

#include <algorithm>
#include <deque>
#include <map>

#include "talearn/errors.hpp"

namespace talearn {

std::size_t Digraph::num_present() const { return static_cast<std::size_t>(std::count(present.begin(), present.end(), true)); }

std::size_t Digraph::num_edges() const {
  std::size_t n = 0;
  for (const auto& s : successors) n += s.size();
  return n;
}

bool Digraph::has_edge(StateId u, StateId v) const {
  const auto& s = successors.at(u);
  return std::binary_search(s.begin(), s.end(), v);
}

Digraph extract_digraph(const Matrix& m, double threshold, StateId initial) {
  if (m.rows() != m.cols()) throw PreconditionError("transition matrix must be square");
  if (initial < 0 || initial >= m.rows()) throw PreconditionError("initial state out of range");
  const auto n = static_cast<std::size_t>(m.rows());
  Digraph g;
  g.initial = initial;
  g.successors.assign(n, {});
  g.present.assign(n, false);
  std::deque<StateId> queue{initial};
  g.present[initial] = true;
  while (!queue.empty()) {
    StateId i = queue.front();
    queue.pop_front();
    for (std::size_t j = 0; j < n; ++j) {
      if (!(m(i, j) > threshold)) continue;
      g.successors[i].push_back(static_cast<StateId>(j));
      if (!g.present[j]) {
        g.present[j] = true;
        queue.push_back(static_cast<StateId>(j));
      }
    }
  }
  return g;
}

std::optional<std::vector<StateId>> observation_isomorphism(const Digraph& a, const std::vector<int>& obs_a,
                                                            const Digraph& b, const std::vector<int>& obs_b) {
  if (obs_a.size() != a.num_vertices() || obs_b.size() != b.num_vertices()) {
    throw PreconditionError("observation vector does not match the digraph");
  }
  if (a.num_present() != b.num_present() || a.num_edges() != b.num_edges()) return std::nullopt;
  if (obs_a[a.initial] != obs_b[b.initial]) return std::nullopt;

  std::vector<StateId> to_b(a.num_vertices(), kNoState);
  std::vector<StateId> to_a(b.num_vertices(), kNoState);
  to_b[a.initial] = b.initial;
  to_a[b.initial] = a.initial;
  std::deque<StateId> queue{a.initial};
  while (!queue.empty()) {
    const StateId u = queue.front();
    queue.pop_front();
    const StateId v = to_b[u];
    if (a.successors[u].size() != b.successors[v].size()) return std::nullopt;
    std::map<int, StateId> by_obs;
    for (StateId w : b.successors[v]) {
      if (!by_obs.emplace(obs_b[w], w).second) return std::nullopt;
    }
    for (StateId x : a.successors[u]) {
      auto it = by_obs.find(obs_a[x]);
      if (it == by_obs.end()) return std::nullopt;
      const StateId y = it->second;
      by_obs.erase(it);
      if (to_b[x] == kNoState && to_a[y] == kNoState) {
        to_b[x] = y;
        to_a[y] = x;
        queue.push_back(x);
      } else if (to_b[x] != y || to_a[y] != x) {
        return std::nullopt;
      }
    }
  }
  return to_b;
}

}  // namespace talearn
