#include "talearn/distiller.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <sstream>

#include "talearn/errors.hpp"
#include "talearn/product_model.hpp"

namespace talearn {

namespace {

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n), classes_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  int find(int x) {
    while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
    return x;
  }
  /// Smaller root wins so the result does not depend on union order.
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (b < a) std::swap(a, b);
    parent_[b] = a;
    --classes_;
    return true;
  }
  std::size_t classes() const { return classes_; }

 private:
  std::vector<int> parent_;
  std::size_t classes_;
};

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace

LumpResult cone_lump_detailed(const Nfa& nfa) {
  nfa.validate();
  const std::size_t n = nfa.size();
  const std::size_t m = nfa.alphabet.size();
  if (n == 0) throw PreconditionError("cannot lump an automaton without states");
  LumpResult result;
  UnionFind uf(n);

  // Members of each class, rebuilt per round in ascending state order.
  for (bool changed = true; changed;) {
    changed = false;
    std::vector<std::vector<StateId>> members(n);
    for (std::size_t q = 0; q < n; ++q) members[uf.find(static_cast<int>(q))].push_back(static_cast<StateId>(q));
    for (std::size_t root = 0; root < n; ++root) {
      if (members[root].empty()) continue;
      for (std::size_t a = 0; a < m; ++a) {
        int first = -1;
        for (StateId q : members[root]) {
          for (StateId t : nfa.delta[q][a]) {
            ++result.stats.check_operations;
            if (first < 0) {
              first = t;
            } else if (uf.unite(first, t)) {
              changed = true;
            }
          }
        }
      }
    }
    ++result.stats.rounds;
    result.stats.class_counts.push_back(uf.classes());
  }

  // Quotient, numbered breadth-first from the initial class.
  std::vector<int> id_of_root(n, -1);
  std::vector<std::vector<StateId>> members(n);
  for (std::size_t q = 0; q < n; ++q) members[uf.find(static_cast<int>(q))].push_back(static_cast<StateId>(q));
  Dfa& dfa = result.ta;
  dfa = Dfa(nfa.alphabet);
  std::deque<int> queue;
  auto class_id = [&](int root) {
    if (id_of_root[root] < 0) {
      const bool acc = nfa.accepting[members[root].front()];
      for (StateId q : members[root]) {
        if (nfa.accepting[q] != acc) {
          throw StructuralError("lumped class mixes accepting and rejecting states (" + nfa.name(members[root].front()) +
                                ", " + nfa.name(q) + ")");
        }
      }
      id_of_root[root] = dfa.add_state("q" + std::to_string(dfa.size()), acc);
      result.partition.representative.push_back(members[root].front());
      queue.push_back(root);
    }
    return id_of_root[root];
  };
  dfa.initial = class_id(uf.find(nfa.initial));
  while (!queue.empty()) {
    const int root = queue.front();
    queue.pop_front();
    for (std::size_t a = 0; a < m; ++a) {
      int target = -1;
      for (StateId q : members[root]) {
        for (StateId t : nfa.delta[q][a]) {
          const int r = uf.find(t);
          if (target >= 0 && target != r) throw StructuralError("lumped automaton is still nondeterministic");
          target = r;
        }
      }
      if (target >= 0) dfa.set_transition(id_of_root[root], a, class_id(target));
    }
  }
  result.partition.class_of.assign(n, -1);
  for (std::size_t q = 0; q < n; ++q) result.partition.class_of[q] = id_of_root[uf.find(static_cast<int>(q))];
  return result;
}

Dfa cone_lump(const Nfa& nfa) { return cone_lump_detailed(nfa).ta; }

std::size_t lump_complexity_probe(const Nfa& nfa) { return cone_lump_detailed(nfa).stats.check_operations; }

Distillation distill_detailed(const HmmParams& learned, const std::vector<Label>& mdp_labels,
                              StateId initial_mdp_state, double threshold) {
  auto chain = chain_from_block_layout(learned.transition, mdp_labels, initial_mdp_state);
  Distillation d;
  d.nfa = extract_nfa(chain, threshold);
  d.lump = cone_lump_detailed(d.nfa);
  d.ta = complete(d.lump.ta, Completion::SelfLoop);
  return d;
}

Dfa distill_ta(const HmmParams& learned, const std::vector<Label>& mdp_labels, StateId initial_mdp_state,
               double threshold) {
  return distill_detailed(learned, mdp_labels, initial_mdp_state, threshold).ta;
}

std::string partition_to_dot(const Nfa& nfa, const LumpPartition& partition) {
  std::ostringstream out;
  out << "digraph lumping {\n  rankdir=LR;\n  __start [shape=point];\n";
  for (std::size_t c = 0; c < partition.num_classes(); ++c) {
    out << "  subgraph cluster_" << c << " {\n    label=\"q" << c << "\";\n";
    for (std::size_t q = 0; q < nfa.size(); ++q) {
      if (partition.class_of[q] != static_cast<int>(c)) continue;
      out << "    n" << q << " [label=\"" << dot_escape(nfa.name(static_cast<StateId>(q))) << "\", shape="
          << (nfa.accepting[q] ? "doublecircle" : "circle") << "];\n";
    }
    out << "  }\n";
  }
  out << "  __start -> n" << nfa.initial << ";\n";
  for (std::size_t q = 0; q < nfa.size(); ++q)
    for (std::size_t a = 0; a < nfa.alphabet.size(); ++a)
      for (StateId t : nfa.delta[q][a])
        out << "  n" << q << " -> n" << t << " [label=\"" << dot_escape(nfa.alphabet[a].pretty()) << "\"];\n";
  out << "}\n";
  return out.str();
}

}  // namespace talearn
