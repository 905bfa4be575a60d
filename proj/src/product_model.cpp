#include "talearn/product_model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <map>

#include "talearn/errors.hpp"

namespace talearn {

namespace {

std::string product_name(StateId s, StateId q) { return "s" + std::to_string(s) + "_q" + std::to_string(q); }

/// States reachable from `initial` through entries strictly above `threshold`, in
/// breadth-first order with successors visited by increasing index.
std::vector<StateId> reachable_states(const Matrix& m, StateId initial, double threshold) {
  std::vector<char> seen(m.rows(), 0);
  std::vector<StateId> order;
  std::deque<StateId> queue{initial};
  seen[initial] = 1;
  while (!queue.empty()) {
    StateId i = queue.front();
    queue.pop_front();
    order.push_back(i);
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) > threshold && !seen[j]) {
        seen[j] = 1;
        queue.push_back(static_cast<StateId>(j));
      }
    }
  }
  return order;
}

/// Shared body of the chain and per-action recoveries.
Matrix marginalize(const Matrix& m, const std::vector<StateId>& state_to_mdp, int num_mdp_states,
                   const std::vector<StateId>& representatives, const RecoveryOptions& options,
                   const Vector& weight) {
  const auto n = m.rows();
  std::vector<std::vector<StateId>> by_mdp(num_mdp_states);
  for (StateId i : representatives) by_mdp[state_to_mdp[i]].push_back(i);
  for (int s = 0; s < num_mdp_states; ++s) {
    if (!by_mdp[s].empty()) continue;
    // No reachable representative: fall back to every product state observing s.
    for (Eigen::Index i = 0; i < n; ++i)
      if (state_to_mdp[i] == s) by_mdp[s].push_back(static_cast<StateId>(i));
    if (by_mdp[s].empty()) throw PreconditionError("no product state observes MDP state " + std::to_string(s));
  }

  Matrix recovered = Matrix::Zero(num_mdp_states, num_mdp_states);
  for (int s = 0; s < num_mdp_states; ++s) {
    std::vector<Vector> marginals;
    for (StateId i : by_mdp[s]) {
      Vector row = Vector::Zero(num_mdp_states);
      for (Eigen::Index j = 0; j < n; ++j) row(state_to_mdp[j]) += m(i, j);
      marginals.push_back(std::move(row));
    }
    for (std::size_t a = 0; a < marginals.size(); ++a) {
      for (std::size_t b = a + 1; b < marginals.size(); ++b) {
        double tv = 0.5 * (marginals[a] - marginals[b]).cwiseAbs().sum();
        if (tv > options.tolerance) {
          throw InconsistencyError("product states observing MDP state " + std::to_string(s) +
                                   " disagree on its successors (total variation " + std::to_string(tv) + ")");
        }
      }
    }
    Vector mean = Vector::Zero(num_mdp_states);
    double total = 0.0;
    for (std::size_t a = 0; a < marginals.size(); ++a) {
      mean += weight(by_mdp[s][a]) * marginals[a];
      total += weight(by_mdp[s][a]);
    }
    if (total > 0.0) {
      recovered.row(s) = mean / total;
    } else {
      // Never visited: fall back to the plain average.
      mean.setZero();
      for (const auto& v : marginals) mean += v;
      recovered.row(s) = mean / static_cast<double>(marginals.size());
    }
  }
  return recovered;
}

// Expected visits per state within the horizon, or all ones when the horizon is not positive.
Vector occupancy(const Matrix& m, StateId initial, int horizon) {
  if (horizon <= 0) return Vector::Ones(m.rows());
  Vector dist = Vector::Zero(m.rows());
  dist(initial) = 1.0;
  Vector visits = dist;
  for (int t = 1; t < horizon; ++t) {
    dist = m.transpose() * dist;
    visits += dist;
  }
  return visits;
}

}  // namespace

ProductModel build_product(const LabelledMdp& mdp, const TaskAutomaton& ta) {
  ta.validate();
  const int ns = mdp.num_states();
  std::vector<std::size_t> symbol_of(ns);
  for (StateId s = 0; s < ns; ++s) {
    auto sym = ta.alphabet.find(mdp.label(s));
    if (!sym) throw PreconditionError("task automaton alphabet lacks label '" + mdp.label(s).str() + "'");
    for (std::size_t q = 0; q < ta.size(); ++q) {
      if (ta.delta[q][*sym] == kNoState) {
        throw PreconditionError("task automaton is incomplete: no transition from " +
                                ta.name(static_cast<StateId>(q)) + " on '" + mdp.label(s).str() + "'");
      }
    }
    symbol_of[s] = *sym;
  }

  ProductModel p;
  p.num_mdp_states = ns;
  p.num_ta_states = static_cast<int>(ta.size());
  p.initial = p.index(mdp.initial_state(), ta.initial);
  const int n = p.size();
  for (auto& m : p.per_action_transition) m = Matrix::Zero(n, n);
  p.successor.resize(n);
  p.accepting.resize(n);
  p.state_label.resize(n);
  p.names.resize(n);
  for (StateId q = 0; q < p.num_ta_states; ++q) {
    for (StateId s = 0; s < ns; ++s) {
      const StateId i = p.index(s, q);
      p.accepting[i] = ta.accepting[q];
      p.state_label[i] = mdp.label(s);
      p.names[i] = product_name(s, q);
      for (Action a : kActions) {
        const StateId s2 = mdp.successor(s, a);
        const StateId q2 = ta.delta[q][symbol_of[s2]];
        const StateId j = p.index(s2, q2);
        p.successor[i][static_cast<int>(a)] = j;
        p.per_action_transition[static_cast<int>(a)](i, j) += 1.0;
      }
    }
  }
  return p;
}

ProductChain induce_chain(const ProductModel& product, const Policy& policy) {
  if (policy.action_distribution.size() != static_cast<std::size_t>(product.num_mdp_states)) {
    throw PreconditionError("policy does not cover every MDP state");
  }
  const int n = product.size();
  ProductChain chain;
  chain.transition = Matrix::Zero(n, n);
  for (StateId i = 0; i < n; ++i) {
    const auto& dist = policy.action_distribution[product.mdp_state(i)];
    for (int a = 0; a < kNumActions; ++a) chain.transition.row(i) += dist[a] * product.per_action_transition[a].row(i);
  }
  chain.initial = product.initial;
  chain.accepting = product.accepting;
  chain.state_to_label = product.state_label;
  chain.names = product.names;
  chain.state_to_mdp.resize(n);
  for (StateId i = 0; i < n; ++i) chain.state_to_mdp[i] = product.mdp_state(i);
  return chain;
}

ProductChain chain_from_block_layout(Matrix transition, const std::vector<Label>& mdp_labels,
                                     StateId initial_mdp_state) {
  const auto ns = static_cast<Eigen::Index>(mdp_labels.size());
  const auto n = transition.rows();
  if (ns == 0 || n != transition.cols() || n % ns != 0) {
    throw PreconditionError("transition matrix is not a square k*|S| block matrix");
  }
  if (initial_mdp_state < 0 || initial_mdp_state >= ns) throw PreconditionError("initial MDP state out of range");
  const auto k = n / ns;
  ProductChain chain;
  chain.transition = std::move(transition);
  chain.initial = initial_mdp_state;
  chain.accepting.resize(n);
  chain.state_to_mdp.resize(n);
  chain.state_to_label.resize(n);
  chain.names.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto s = static_cast<StateId>(i % ns);
    const auto q = static_cast<StateId>(i / ns);
    chain.accepting[i] = q == k - 1;
    chain.state_to_mdp[i] = s;
    chain.state_to_label[i] = mdp_labels[s];
    chain.names[i] = product_name(s, q);
  }
  return chain;
}

Nfa extract_nfa(const ProductChain& chain, double threshold) {
  const auto order = reachable_states(chain.transition, chain.initial, threshold);
  std::vector<StateId> id(chain.size(), kNoState);
  Nfa nfa{Alphabet(chain.state_to_label)};
  for (StateId i : order) id[i] = nfa.add_state(chain.names[i], chain.accepting[i]);
  nfa.initial = id[chain.initial];
  std::vector<std::size_t> symbol(chain.size());
  for (StateId i = 0; i < chain.size(); ++i) symbol[i] = nfa.alphabet.index(chain.state_to_label[i]);
  for (StateId i : order)
    for (StateId j = 0; j < chain.size(); ++j)
      if (chain.transition(i, j) > threshold) nfa.add_transition(id[i], symbol[j], id[j]);
  return nfa;
}

Matrix recover_mdp_probabilities(const ProductChain& chain, int num_mdp_states, const RecoveryOptions& options) {
  if (chain.state_to_mdp.size() != static_cast<std::size_t>(chain.size())) {
    throw PreconditionError("chain lacks its product-to-MDP state map");
  }
  auto reps = reachable_states(chain.transition, chain.initial, options.reach_threshold);
  return marginalize(chain.transition, chain.state_to_mdp, num_mdp_states, reps, options,
                     occupancy(chain.transition, chain.initial, options.occupancy_horizon));
}

std::array<Matrix, kNumActions> recover_mdp_action_probabilities(const ProductModel& product,
                                                                 const RecoveryOptions& options) {
  Matrix any_action = Matrix::Zero(product.size(), product.size());
  for (const auto& m : product.per_action_transition) any_action += m;
  auto reps = reachable_states(any_action, product.initial, options.reach_threshold);
  std::vector<StateId> state_to_mdp(product.size());
  for (StateId i = 0; i < product.size(); ++i) state_to_mdp[i] = product.mdp_state(i);
  std::array<Matrix, kNumActions> out;
  for (int a = 0; a < kNumActions; ++a) {
    out[a] = marginalize(product.per_action_transition[a], state_to_mdp, product.num_mdp_states, reps, options,
                         occupancy(any_action / kNumActions, product.initial, options.occupancy_horizon));
  }
  return out;
}

bool observationally_equivalent(const ProductChain& a, const ProductChain& b, int horizon, std::size_t max_states,
                                double tol) {
  if (static_cast<std::size_t>(a.size()) > max_states || static_cast<std::size_t>(b.size()) > max_states) {
    throw PreconditionError("chain exceeds the state cap for exhaustive observation comparison");
  }
  if (horizon < 0) throw PreconditionError("horizon must be non-negative");
  if (!(a.observe(a.initial) == b.observe(b.initial))) return false;

  using ObsKey = std::pair<StateId, int>;
  // Depth-first over observation sequences with positive probability under either chain.
  std::function<bool(const Vector&, const Vector&, int)> agree = [&](const Vector& fa, const Vector& fb,
                                                                     int depth) -> bool {
    if (depth == horizon) return true;
    const Vector na = a.transition.transpose() * fa;
    const Vector nb = b.transition.transpose() * fb;
    std::map<ObsKey, std::pair<double, double>> mass;
    for (StateId i = 0; i < a.size(); ++i)
      if (na(i) > 0.0) mass[{a.state_to_mdp[i], a.accepting[i] ? 1 : 0}].first += na(i);
    for (StateId i = 0; i < b.size(); ++i)
      if (nb(i) > 0.0) mass[{b.state_to_mdp[i], b.accepting[i] ? 1 : 0}].second += nb(i);
    for (const auto& [obs, pq] : mass) {
      if (std::abs(pq.first - pq.second) > tol) return false;
      if (pq.first <= tol && pq.second <= tol) continue;
      Vector ma = Vector::Zero(a.size()), mb = Vector::Zero(b.size());
      for (StateId i = 0; i < a.size(); ++i)
        if (a.state_to_mdp[i] == obs.first && (a.accepting[i] ? 1 : 0) == obs.second) ma(i) = na(i);
      for (StateId i = 0; i < b.size(); ++i)
        if (b.state_to_mdp[i] == obs.first && (b.accepting[i] ? 1 : 0) == obs.second) mb(i) = nb(i);
      if (!agree(ma, mb, depth + 1)) return false;
    }
    return true;
  };
  Vector fa = Vector::Zero(a.size()), fb = Vector::Zero(b.size());
  fa(a.initial) = 1.0;
  fb(b.initial) = 1.0;
  return agree(fa, fb, 0);
}

Nfa attainable_trace_nfa(const LabelledMdp& mdp) {
  Nfa nfa{mdp.label_alphabet()};
  for (StateId s = 0; s < mdp.num_states(); ++s) nfa.add_state("s" + std::to_string(s), true);
  nfa.initial = mdp.initial_state();
  for (StateId s = 0; s < mdp.num_states(); ++s)
    for (Action a : kActions) {
      const StateId t = mdp.successor(s, a);
      nfa.add_transition(s, mdp.label(t), t);
    }
  return nfa;
}

Dfa attainable_trace_dfa(const LabelledMdp& mdp, const Alphabet& alphabet) {
  Nfa base = attainable_trace_nfa(mdp);
  if (!alphabet.includes(base.alphabet)) throw PreconditionError("alphabet must include every MDP label");
  Nfa wide{alphabet};
  for (std::size_t q = 0; q < base.size(); ++q) wide.add_state(base.names[q], base.accepting[q]);
  wide.initial = base.initial;
  for (std::size_t q = 0; q < base.size(); ++q)
    for (std::size_t sym = 0; sym < base.alphabet.size(); ++sym)
      for (StateId t : base.delta[q][sym]) wide.add_transition(static_cast<StateId>(q), base.alphabet[sym], t);
  return minimize(subset_construction(wide));
}

Dfa mdp_restricted_ta(const LabelledMdp& mdp, const TaskAutomaton& ta) {
  auto chain = induce_chain(build_product(mdp, ta), uniform_random_policy(mdp));
  return minimize(subset_construction(extract_nfa(chain)));
}

bool equivalent_on_attainable_traces(const LabelledMdp& mdp, const TaskAutomaton& candidate,
                                     const TaskAutomaton& truth) {
  const Alphabet sigma = mdp.label_alphabet().merged_with(candidate.alphabet).merged_with(truth.alphabet);
  const Dfa a = extend_alphabet(candidate, sigma);
  const Dfa b = extend_alphabet(truth, sigma);
  return language_equivalent_within(a, b, attainable_trace_dfa(mdp, sigma));
}

}  // namespace talearn
