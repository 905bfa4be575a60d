#include <doctest.h>

#include "oracles.hpp"
#include "talearn/digraph.hpp"
#include "talearn/product_model.hpp"
#include "talearn/scenarios.hpp"

using namespace talearn;

namespace {

std::vector<int> observation_codes(const ProductChain& c) {
  std::vector<int> obs(c.size());
  for (int i = 0; i < c.size(); ++i) obs[i] = c.observe(i).reward_bit * 1000 + c.observe(i).mdp_state;
  return obs;
}

}  // namespace

TEST_CASE("digraph extraction keeps reachable vertices only") {
  Matrix m(4, 4);
  m << 0.5, 0.5, 0, 0,  //
      0, 0.995, 0.005, 0,  //
      0, 0, 1, 0,  //
      1, 0, 0, 0;
  const Digraph d = extract_digraph(m, 0.01, 0);
  CHECK(d.num_vertices() == 4);
  CHECK(d.num_present() == 2);
  CHECK(d.num_edges() == 3);
  CHECK(d.has_edge(0, 1));
  CHECK_FALSE(d.has_edge(1, 2));
  CHECK_FALSE(d.present[3]);
  CHECK(extract_digraph(m, 0.0, 0).num_present() == 3);
}

TEST_CASE("observation isomorphism of product digraphs") {
  const auto g = builtin_grid("grid3");
  const auto ta = fit_to_environment(builtin_task("coffee_couch_stairs"), g);
  const auto chain = induce_chain(build_product(g, ta), uniform_random_policy(g));
  const auto d = extract_digraph(chain.transition, 0.01, chain.initial);
  const auto obs = observation_codes(chain);

  auto self = observation_isomorphism(d, obs, d, obs);
  REQUIRE(self.has_value());
  for (int i = 0; i < chain.size(); ++i) CHECK((*self)[i] == (d.present[i] ? i : kNoState));

  // Swapping the two middle blocks relabels hidden states without changing observations.
  const int n = g.num_states();
  std::vector<int> perm(chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    const int q = i / n, s = i % n;
    perm[i] = (q == 1 ? 2 : q == 2 ? 1 : q) * n + s;
  }
  Matrix swapped(chain.size(), chain.size());
  std::vector<int> obs_swapped(chain.size());
  for (int i = 0; i < chain.size(); ++i) {
    obs_swapped[perm[i]] = obs[i];
    for (int j = 0; j < chain.size(); ++j) swapped(perm[i], perm[j]) = chain.transition(i, j);
  }
  const auto ds = extract_digraph(swapped, 0.01, perm[chain.initial]);
  auto iso = observation_isomorphism(d, obs, ds, obs_swapped);
  REQUIRE(iso.has_value());
  for (int i = 0; i < chain.size(); ++i)
    if (d.present[i]) CHECK((*iso)[i] == perm[i]);

  // An extra edge breaks the isomorphism.
  Matrix extra = chain.transition;
  extra(0, 8) = 0.2;
  normalize_rows(extra);
  CHECK_FALSE(observation_isomorphism(d, obs, extract_digraph(extra, 0.01, 0), obs).has_value());

  // A different task yields a non-isomorphic digraph.
  const auto other = induce_chain(build_product(g, fit_to_environment(builtin_task("coffee_stairs"), g)),
                                  uniform_random_policy(g));
  CHECK_FALSE(observation_isomorphism(d, obs, extract_digraph(other.transition, 0.01, 0), observation_codes(other))
                  .has_value());
}
