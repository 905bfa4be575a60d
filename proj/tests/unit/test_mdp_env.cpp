#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "oracles.hpp"
#include "talearn/errors.hpp"
#include "talearn/mdp_env.hpp"
#include "talearn/scenarios.hpp"

using namespace talearn;

TEST_CASE("grid sizes and labels") {
  const auto g = builtin_grid("grid3");
  CHECK(g.num_states() == 9);
  CHECK(g.initial_state() == 0);
  // Rows are listed top first: the bottom-left cell is the carpet.
  CHECK(g.label(0) == Label("carpet"));
  CHECK(g.label(2) == Label("coffee"));
  CHECK(g.label(6) == Label("stairs"));
  CHECK(g.label(4) == Label("couch"));
  CHECK(g.label_alphabet().size() == 6);
  CHECK(builtin_grid("case_study").num_states() == 25);

  const auto one = build_gridworld(1, 1, {}, Cell{0, 0});
  CHECK(one.num_states() == 1);
  for (Action a : kActions) CHECK(one.successor(0, a) == 0);
  CHECK(one.wall_count(0) == 4);

  CHECK_THROWS_AS(build_gridworld(3, 3, {{Cell{3, 0}, Label("x")}}, Cell{0, 0}), PreconditionError);
  CHECK_THROWS_AS(build_gridworld(3, 3, {}, Cell{0, -1}), PreconditionError);
  CHECK_THROWS_AS(build_gridworld(0, 3, {}, Cell{0, 0}), PreconditionError);
}

TEST_CASE("3x3 neighbour table") {
  const auto g = build_gridworld(3, 3, {}, Cell{0, 0});
  // Up, Down, Left, Right, with y = 0 the bottom row.
  const int expected[9][4] = {{3, 0, 0, 1}, {4, 1, 0, 2}, {5, 2, 1, 2}, {6, 0, 3, 4}, {7, 1, 3, 5},
                              {8, 2, 4, 5}, {6, 3, 6, 7}, {7, 4, 6, 8}, {8, 5, 7, 8}};
  for (int s = 0; s < 9; ++s)
    for (int a = 0; a < 4; ++a) CHECK(move(g, s, kActions[a]) == expected[s][a]);
  CHECK(g.wall_count(0) == 2);
  CHECK(g.wall_count(1) == 1);
  CHECK(g.wall_count(4) == 0);
}

TEST_CASE("uniform policy and induced chain") {
  const auto g = builtin_grid("grid4");
  const auto pi = uniform_random_policy(g);
  for (const auto& row : pi.action_distribution)
    for (double p : row) CHECK(p == 0.25);
  const Matrix q = induced_chain(g, pi);
  CHECK(is_row_stochastic(q, 1e-12));
  for (int s = 0; s < g.num_states(); ++s) CHECK(q(s, s) == doctest::Approx(0.25 * g.wall_count(s)).epsilon(1e-15));
}

namespace {

std::vector<Episode> sim(const LabelledMdp& g, const TaskAutomaton& ta, int len, int n, std::uint64_t seed) {
  return simulate_episodes(g, ta, uniform_random_policy(g), len, n, seed);
}

}  // namespace

TEST_CASE("simulation is deterministic and per-episode streams are independent of n") {
  const auto g = builtin_grid("grid3");
  const auto ta = fit_to_environment(builtin_task("coffee_stairs"), g);
  const auto a = sim(g, ta, 20, 10, 42);
  const auto b = sim(g, ta, 20, 10, 42);
  const auto c = sim(g, ta, 20, 25, 42);
  CHECK(a == b);
  CHECK(std::equal(a.begin(), a.end(), c.begin()));
  CHECK_FALSE(a == sim(g, ta, 20, 10, 43));
  CHECK(sim(g, ta, 20, 0, 1).empty());
}

TEST_CASE("simulated episodes are well formed") {
  const auto g = builtin_grid("grid3");
  const auto ta = fit_to_environment(builtin_task("coffee_stairs"), g);
  const auto eps = sim(g, ta, 34, 200, 5);
  validate_episodes(g, eps);
  const Matrix q = induced_chain(g, uniform_random_policy(g));
  for (const auto& ep : eps) {
    REQUIRE(ep.length() == 35);
    CHECK(ep.states[0] == g.initial_state());
    // Replay: the automaton never reads the initial label.
    StateId u = ta.initial;
    CHECK(ep.rewards[0] == (ta.accepting[u] ? 1 : 0));
    for (std::size_t t = 1; t < ep.length(); ++t) {
      CHECK(q(ep.states[t - 1], ep.states[t]) > 0.0);
      CHECK(ep.trace[t] == g.label(ep.states[t]));
      u = ta.delta[u][ta.alphabet.index(ep.trace[t])];
      CHECK(ep.rewards[t] == (ta.accepting[u] ? 1 : 0));
      CHECK(ep.rewards[t] >= ep.rewards[t - 1]);
    }
  }
}

TEST_CASE("reward fraction at the experiment setting") {
  const auto g = builtin_grid("grid3");
  const auto ta = fit_to_environment(builtin_task("coffee_stairs"), g);
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const double f = reward_fraction(sim(g, ta, 34, 275, seed));
    CHECK(f >= 0.10);
    CHECK(f <= 0.60);
  }
}

TEST_CASE("accepting initial state rewards every step") {
  const auto g = builtin_grid("tiny");
  Dfa ta(g.label_alphabet());
  ta.add_state("q0", true);
  ta = complete(ta);
  for (const auto& ep : sim(g, ta, 6, 5, 1))
    for (int r : ep.rewards) CHECK(r == 1);
}

TEST_CASE("missing automaton transition is a simulation error") {
  const auto g = builtin_grid("grid3");
  CHECK_THROWS_AS(sim(g, builtin_task("coffee_stairs"), 10, 5, 1), SimulationError);
}

TEST_CASE("grid and episode text round trip") {
  const auto g = builtin_grid("case_study");
  std::stringstream s;
  write_grid(s, g);
  const auto back = read_grid(s);
  CHECK(back.width() == 5);
  CHECK(back.labels() == g.labels());
  CHECK(back.initial_state() == g.initial_state());

  const auto ta = fit_to_environment(builtin_task("book"), g);
  const auto eps = sim(g, ta, 8, 4, 3);
  std::stringstream e;
  write_episodes(e, eps);
  CHECK(read_episodes(e) == eps);
  std::stringstream empty;
  write_episodes(empty, std::vector<Episode>{});
  CHECK(read_episodes(empty).empty());
}

TEST_CASE("grid parse errors") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      (void)read_grid(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 9999;
  };
  CHECK(line_of("size 2 2\ninitial 0 0\n. .\n. . .\n") == 4);
  CHECK(line_of("size 2\n") == 1);
  CHECK(line_of("size 2 2\ninitial 0 0\n. a+\n. .\n") == 3);
  CHECK(line_of("size 2 2\ninitial x 0\n") == 2);
  std::istringstream missing("size 2 2\n. .\n. .\n");
  CHECK_THROWS_AS(read_grid(missing), ParseError);
  std::istringstream bad_episode("0 1\n. .\n0\n");
  CHECK_THROWS_AS(read_episodes(bad_episode), ParseError);
}

TEST_CASE("episode validation") {
  const auto g = builtin_grid("tiny");
  Episode ep{{0, 1}, {Label{}, Label{}}, {0, 0}};
  CHECK_THROWS_AS(validate_episodes(g, std::vector<Episode>{ep}), PreconditionError);
  ep.trace[1] = g.label(1);
  validate_episodes(g, std::vector<Episode>{ep});
  ep.rewards[1] = 2;
  CHECK_THROWS_AS(validate_episodes(g, std::vector<Episode>{ep}), PreconditionError);
}
