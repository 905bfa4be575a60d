#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "talearn/automata.hpp"
#include "talearn/errors.hpp"
#include "talearn/scenarios.hpp"

using namespace talearn;

namespace {

std::vector<Label> word(std::initializer_list<const char*> tokens) {
  std::vector<Label> w;
  for (const char* t : tokens) w.push_back(Label::parse(t));
  return w;
}

TaskAutomaton coffee_stairs() { return complete(builtin_task("coffee_stairs")); }

}  // namespace

TEST_CASE("run on the coffee-then-stairs automaton") {
  const auto ta = coffee_stairs();
  auto r = run(ta, word({".", ".", "coffee", ".", "stairs"}));
  CHECK(r.accepted);
  CHECK(r.final_state == 2);
  CHECK_FALSE(run(ta, std::vector<Label>{}).accepted);
  r = run(ta, word({"stairs", "coffee"}));
  CHECK_FALSE(r.accepted);
  CHECK(r.final_state == 1);
  CHECK_THROWS_AS(run(ta, word({"tv"})), PreconditionError);
}

TEST_CASE("missing transitions reject") {
  const auto partial = builtin_task("coffee_stairs");
  auto r = run(partial, word({"."}));
  CHECK_FALSE(r.accepted);
  CHECK(r.final_state == kNoState);
}

TEST_CASE("self-loop completion preserves defined runs") {
  const auto partial = builtin_task("coffee_stairs");
  const auto full = complete(partial);
  CHECK(full.is_complete());
  for (const auto& w : oracle::all_words(partial.alphabet, 5)) {
    const auto r = run(partial, w);
    if (r.final_state != kNoState) CHECK(run(full, w).accepted == r.accepted);
  }
  CHECK(isomorphic(complete(full), full));
  CHECK(complete(full).delta == full.delta);
}

TEST_CASE("sink completion rejects previously missing symbols") {
  const auto sink = complete(builtin_task("coffee_stairs"), Completion::Sink);
  CHECK(sink.is_complete());
  CHECK(sink.size() == 4);
  CHECK_FALSE(run(sink, word({"coffee", "stairs", "."})).accepted);
  CHECK_FALSE(run(sink, word({"stairs", "coffee", "stairs"})).accepted);
  CHECK(run(sink, word({"coffee", "stairs"})).accepted);
}

TEST_CASE("subset construction agrees with direct NFA simulation") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const int symbols = 2 + static_cast<int>(seed % 2);
    const Nfa nfa = oracle::random_nfa(8, symbols, seed);
    const Dfa dfa = subset_construction(nfa);
    CHECK(dfa.is_complete());
    for (const auto& w : oracle::all_words(nfa.alphabet, 6)) REQUIRE(oracle::dfa_accepts(dfa, w) == oracle::nfa_accepts(nfa, w));
  }
}

TEST_CASE("subset construction of a DFA keeps its reachable part") {
  Dfa d = oracle::random_dfa(6, 2, 7);
  const Dfa det = subset_construction(to_nfa(d));
  CHECK(isomorphic(det, trim(d)));
}

TEST_CASE("minimize") {
  const auto ta = coffee_stairs();
  CHECK(minimize(ta).size() == 3);
  CHECK(isomorphic(minimize(ta), ta));

  // Two bisimilar accepting states merge.
  Dfa d(oracle::letters(2));
  d.add_state("p");
  d.add_state("x", true);
  d.add_state("y", true);
  d.set_transition(0, std::size_t{0}, 1);
  d.set_transition(0, std::size_t{1}, 2);
  for (int q = 1; q < 3; ++q) {
    d.set_transition(q, std::size_t{0}, q);
    d.set_transition(q, std::size_t{1}, 3 - q);
  }
  CHECK(minimize(d).size() == 2);
  CHECK(language_equivalent(minimize(d), d));

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dfa r = oracle::random_dfa(8, 3, seed);
    const Dfa m = minimize(r);
    CHECK(m.size() <= r.size());
    CHECK(isomorphic(minimize(m), m));
    CHECK(language_equivalent(m, r));
    for (const auto& w : oracle::all_words(r.alphabet, 4)) REQUIRE(oracle::dfa_accepts(m, w) == oracle::dfa_accepts(r, w));
  }
  CHECK_THROWS_AS(minimize(builtin_task("coffee_stairs")), PreconditionError);
}

TEST_CASE("language equivalence matches word enumeration") {
  std::vector<Dfa> pool;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    Dfa r = oracle::random_dfa(3, 2, seed);
    pool.push_back(r);
    pool.push_back(minimize(r));
  }
  // Words up to length 7 separate any two DFAs of at most 3 + 3 states.
  const auto words = oracle::all_words(oracle::letters(2), 7);
  auto brute = [&](const Dfa& a, const Dfa& b) {
    for (const auto& w : words)
      if (oracle::dfa_accepts(a, w) != oracle::dfa_accepts(b, w)) return false;
    return true;
  };
  for (const auto& a : pool) {
    CHECK(language_equivalent(a, a));
    for (const auto& b : pool) {
      const bool eq = language_equivalent(a, b);
      REQUIRE(eq == brute(a, b));
      CHECK(eq == language_equivalent(b, a));
      const auto w = distinguishing_word(a, b);
      CHECK(w.has_value() == !eq);
      if (w) CHECK(oracle::dfa_accepts(a, *w) != oracle::dfa_accepts(b, *w));
      for (const auto& c : pool)
        if (eq && language_equivalent(b, c)) CHECK(language_equivalent(a, c));
    }
  }

  auto flipped = coffee_stairs();
  for (std::size_t q = 0; q < flipped.size(); ++q) flipped.accepting[q] = !flipped.accepting[q];
  CHECK_FALSE(language_equivalent(coffee_stairs(), flipped));
  CHECK_THROWS_AS(language_equivalent(coffee_stairs(), complete(builtin_task("book"))), PreconditionError);
}

TEST_CASE("shortest distinguishing word") {
  const auto a = coffee_stairs();
  auto b = a;
  b.accepting[1] = true;
  const auto w = distinguishing_word(a, b);
  REQUIRE(w.has_value());
  CHECK(*w == word({"coffee"}));
  CHECK_FALSE(distinguishing_word(a, a).has_value());
}

TEST_CASE("language equivalence within a domain") {
  const auto a = coffee_stairs();
  auto b = a;
  b.accepting[1] = true;
  // Domain: words without coffee.
  Dfa domain(a.alphabet);
  domain.add_state("d", true);
  domain.set_transition(0, Label{}, 0);
  domain.set_transition(0, Label("stairs"), 0);
  CHECK(language_equivalent_within(a, b, domain));
  CHECK_FALSE(language_equivalent_within(a, b, complete(domain)));
}

TEST_CASE("partial minimization keeps defined words") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Dfa r = oracle::random_dfa(7, 2, seed, 0.35);
    const Dfa m = minimize_partial(r);
    CHECK(m.size() <= trim(r).size());
    for (const auto& w : oracle::all_words(r.alphabet, 6)) {
      const auto rr = run(r, w);
      if (rr.final_state != kNoState) {
        const auto mr = run(m, w);
        REQUIRE(mr.final_state != kNoState);
        REQUIRE(mr.accepted == rr.accepted);
      }
    }
  }
  // Two states that disagree nowhere on defined words merge.
  Dfa d(oracle::letters(2));
  d.add_state("p");
  d.add_state("x");
  d.add_state("acc", true);
  d.set_transition(0, std::size_t{0}, 1);
  d.set_transition(1, std::size_t{1}, 2);
  CHECK(minimize_partial(d).size() == 2);
}

TEST_CASE("text format round trip") {
  const auto ta = coffee_stairs();
  std::stringstream s;
  write_text(s, ta);
  const Dfa back = read_dfa_text(s);
  CHECK(back.delta == ta.delta);
  CHECK(back.accepting == ta.accepting);
  CHECK(back.names == ta.names);
  CHECK(back.alphabet == ta.alphabet);

  const Nfa n = oracle::random_nfa(5, 2, 3, 0.4);
  std::stringstream t;
  write_text(t, n);
  const Nfa nb = read_nfa_text(t);
  CHECK(nb.delta == n.delta);
  CHECK(nb.accepting == n.accepting);
}

TEST_CASE("text parse errors carry line numbers") {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      (void)read_dfa_text(in);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 9999;
  };
  CHECK(line_of("alphabet . a\nstates q0\ninitial q0\nq0 b q0\n") == 4);
  CHECK(line_of("alphabet . a\nstates q0\ninitial q9\n") == 3);
  CHECK(line_of("alphabet . a\nstates q0 q0\ninitial q0\n") == 2);
  CHECK(line_of("alphabet . a\nstates q0\ninitial q0\nq0 a\n") == 4);
  std::istringstream nondet("alphabet a\nstates p q\ninitial p\np a p\np a q\n");
  CHECK_THROWS_AS(read_dfa_text(nondet), ParseError);
  std::istringstream no_states("alphabet a\n");
  CHECK_THROWS_AS(read_dfa_text(no_states), ParseError);
}

TEST_CASE("DOT output") {
  const std::string dot = to_dot(coffee_stairs(), "g");
  CHECK(dot.find("digraph \"g\"") != std::string::npos);
  CHECK(dot.find("doublecircle") != std::string::npos);
  CHECK(dot.find("coffee") != std::string::npos);
  const std::string ndot = to_dot(oracle::random_nfa(3, 2, 1, 0.5));
  CHECK(ndot.find("digraph \"nfa\"") != std::string::npos);
}
