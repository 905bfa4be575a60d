#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/matrix.hpp"

namespace talearn {

/// Positive-probability digraph of a Markov chain. Vertices keep the indices of the
/// matrix rows; vertices not reachable from `initial` are marked absent and have no edges.
struct Digraph {
  StateId initial = 0;
  std::vector<std::vector<StateId>> successors;
  std::vector<bool> present;

  std::size_t num_vertices() const { return successors.size(); }
  std::size_t num_present() const;
  std::size_t num_edges() const;
  bool has_edge(StateId u, StateId v) const;
};

/// Edge i -> j iff m(i, j) > threshold, restricted to vertices reachable from `initial`.
Digraph extract_digraph(const Matrix& m, double threshold, StateId initial);

/// Isomorphism between the present parts of `a` and `b` that maps initial to initial
/// and preserves the per-vertex observation codes. In a product chain every successor
/// of a vertex carries a distinct observation, so matching successors by observation
/// determines the bijection; a vertex whose successors share an observation makes the
/// search fail. Returns the map a-vertex -> b-vertex (kNoState for absent vertices).
std::optional<std::vector<StateId>> observation_isomorphism(const Digraph& a, const std::vector<int>& obs_a,
                                                            const Digraph& b, const std::vector<int>& obs_b);

}  // namespace talearn
