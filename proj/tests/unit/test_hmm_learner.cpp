#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "talearn/digraph.hpp"
#include "talearn/errors.hpp"
#include "talearn/hmm_learner.hpp"
#include "talearn/product_model.hpp"
#include "talearn/scenarios.hpp"

using namespace talearn;

namespace {

HmmParams random_params(int n, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.05, 1.0);
  HmmParams p{Matrix(n, n), Matrix(n, m), Vector(n)};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) p.transition(i, j) = u(rng);
    for (int o = 0; o < m; ++o) p.emission(i, o) = u(rng);
    p.initial(i) = u(rng);
  }
  normalize_rows(p.transition);
  normalize_rows(p.emission);
  p.initial /= p.initial.sum();
  return p;
}

std::vector<int> random_obs(int T, int m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> o(0, m - 1);
  std::vector<int> obs(T);
  for (int& x : obs) x = o(rng);
  return obs;
}

TaskAutomaton reach_a(const LabelledMdp& g) {
  std::istringstream in("alphabet a\nstates q0 q1\ninitial q0\naccepting q1\nq0 a q1\n");
  return fit_to_environment(read_dfa_text(in), g);
}

struct Setup {
  LabelledMdp mdp;
  std::vector<ObservationSeq> obs;
  HmmParams init;
};

Setup tiny_setup(int n_episodes, int len, std::uint64_t seed, double smoothing = 0.01) {
  auto g = builtin_grid("tiny");
  const auto eps = simulate_episodes(g, reach_a(g), uniform_random_policy(g), len, n_episodes, seed);
  ObservationEncoder enc(g, ObservationMode::State);
  auto init = make_params(spatial_initialization(g, 2, smoothing), 2, g, enc);
  return {g, enc.encode(eps), init};
}

}  // namespace

TEST_CASE("emission matrix layout") {
  const Matrix e = build_emission_matrix(3, 9);
  REQUIRE(e.rows() == 27);
  REQUIRE(e.cols() == 18);
  for (int i = 0; i < 27; ++i)
    for (int o = 0; o < 18; ++o) {
      const int s = i % 9;
      const bool accepting = i >= 18;
      CHECK(e(i, o) == (o == (accepting ? 9 + s : s) ? 1.0 : 0.0));
    }
  const Matrix one = build_emission_matrix(1, 4);
  CHECK(one.rows() == 4);
  for (int s = 0; s < 4; ++s) CHECK(one(s, 4 + s) == 1.0);
  CHECK(one.leftCols(4).isZero());

  const Vector rho = initial_distribution(3, 9, 2);
  CHECK(rho.sum() == 1.0);
  CHECK(rho(2) == 1.0);
}

TEST_CASE("observation encoding") {
  const auto g = builtin_grid("tiny");
  ObservationEncoder st(g, ObservationMode::State);
  CHECK(st.num_observations() == 8);
  CHECK(st.encode(3, 1) == 7);
  ObservationEncoder lab(g, ObservationMode::Label);
  CHECK(lab.num_symbols() == 3);
  CHECK(lab.symbol(0) == lab.symbol(2));
  CHECK(lab.symbol(1) != lab.symbol(3));
  const auto p = make_params(spatial_initialization(g, 2, 0.01), 2, g, lab);
  CHECK(p.emission.rows() == 8);
  CHECK(p.emission.cols() == 6);
  p.validate();
}

TEST_CASE("spatial initialization values") {
  const auto g = build_gridworld(3, 3, {}, Cell{0, 0});
  const double sm = 0.01;
  const Matrix one = spatial_initialization(g, 1, sm);
  const double eps = sm / 9;
  // Corner: stays with 0.5, two neighbours with 0.25, six zeros smoothed.
  const double corner = 1.0 + 6 * eps;
  CHECK(one(0, 0) == doctest::Approx(0.5 / corner).epsilon(1e-14));
  CHECK(one(0, 1) == doctest::Approx(0.25 / corner).epsilon(1e-14));
  CHECK(one(0, 8) == doctest::Approx(eps / corner).epsilon(1e-14));
  // Edge: stays with 0.25, three neighbours, five zeros.
  const double edge = 1.0 + 5 * eps;
  CHECK(one(1, 1) == doctest::Approx(0.25 / edge).epsilon(1e-14));
  CHECK(one(1, 4) == doctest::Approx(0.25 / edge).epsilon(1e-14));

  const Matrix three = spatial_initialization(g, 3, sm);
  const double eps3 = sm / 27;
  const double corner3 = 1.0 + 24 * eps3;
  CHECK(three(9, 9) == doctest::Approx(0.5 / corner3).epsilon(1e-14));
  CHECK(three(9, 0) == doctest::Approx(eps3 / corner3).epsilon(1e-14));
  CHECK(is_row_stochastic(three, 1e-12));
  CHECK_THROWS_AS(spatial_initialization(g, 0, sm), PreconditionError);
  CHECK_THROWS_AS(spatial_initialization(g, 1, 0.0), PreconditionError);
}

TEST_CASE("uniform initialization") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix m = uniform_initialization(12, seed);
    CHECK(m.minCoeff() > 0.0);
    CHECK(is_row_stochastic(m, 1e-12));
  }
  CHECK(uniform_initialization(6, 3) == uniform_initialization(6, 3));
  CHECK_FALSE(uniform_initialization(6, 3) == uniform_initialization(6, 4));
}

TEST_CASE("forward-backward matches path enumeration") {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const int n = 2 + static_cast<int>(seed % 7);
    const int T = 1 + static_cast<int>(seed % 6);
    const int m = 3;
    const auto p = random_params(n, m, seed);
    const auto obs = random_obs(T, m, seed + 1000);
    const double prob = oracle::path_sum_probability(p, obs);
    const auto fb = forward_backward(p, obs);
    CHECK(fb.log_likelihood == doctest::Approx(std::log(prob)).epsilon(1e-9));
    CHECK(log_likelihood(p, obs) == doctest::Approx(std::log(prob)).epsilon(1e-9));

    const auto ref = oracle::unscaled_forward_backward(p, obs);
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i) CHECK(std::abs(fb.gamma(t, i) - ref.alpha[t][i] * ref.beta[t][i] / prob) <= 1e-9);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double x = 0.0;
        for (int t = 0; t + 1 < T; ++t)
          x += ref.alpha[t][i] * p.transition(i, j) * p.emission(j, obs[t + 1]) * ref.beta[t + 1][j];
        CHECK(std::abs(fb.xi(i, j) - x / prob) <= 1e-9);
      }
  }
}

TEST_CASE("single observation posterior") {
  const auto p = random_params(4, 2, 9);
  const auto fb = forward_backward(p, {1});
  double z = 0.0;
  for (int i = 0; i < 4; ++i) z += p.initial(i) * p.emission(i, 1);
  for (int i = 0; i < 4; ++i) CHECK(fb.gamma(0, i) == doctest::Approx(p.initial(i) * p.emission(i, 1) / z));
  CHECK(fb.xi.isZero());
}

TEST_CASE("EM never decreases the log-likelihood") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    auto [g, obs, params] = tiny_setup(200, 8, seed);
    double prev = -INFINITY;
    for (int it = 0; it < 30; ++it) {
      auto r = baum_welch_pass(params, obs);
      CHECK(r.log_likelihood >= prev - 1e-9 * std::abs(prev));
      CHECK(is_row_stochastic(r.params.transition, 1e-12));
      prev = r.log_likelihood;
      params = r.params;
    }
  }
  // Dense random model with re-estimated emissions.
  auto p = random_params(5, 3, 1);
  std::vector<ObservationSeq> seqs;
  for (int e = 0; e < 20; ++e) seqs.push_back(random_obs(6, 3, 100 + e));
  double prev = -INFINITY;
  for (int it = 0; it < 30; ++it) {
    auto r = baum_welch_pass(p, seqs, {.reestimate_emissions = true});
    CHECK(r.log_likelihood >= prev - 1e-9 * std::abs(prev));
    CHECK(is_row_stochastic(r.params.emission, 1e-12));
    prev = r.log_likelihood;
    p = r.params;
  }
}

TEST_CASE("training keeps emissions and is thread independent") {
  auto [g, obs, init] = tiny_setup(300, 8, 4);
  TrainOptions opt;
  opt.max_iters = 40;
  opt.tol = 1e-300;
  const auto a = train(init, obs, opt);
  CHECK(a.params.emission == init.emission);
  CHECK(a.params.initial == init.initial);
  CHECK(a.report.iterations == 40);
  CHECK(a.report.log_likelihood_trace.size() == 40);
  opt.threads = 4;
  const auto b = train(init, obs, opt);
  CHECK(a.params.transition == b.params.transition);
  CHECK(a.report.final_delta == b.report.final_delta);
}

TEST_CASE("loose tolerance stops after one pass") {
  auto [g, obs, init] = tiny_setup(50, 6, 2);
  TrainOptions opt;
  opt.tol = 10.0;
  const auto r = train(init, obs, opt);
  CHECK(r.report.iterations == 1);
  CHECK(r.report.converged);
}

TEST_CASE("checkpoints fire on schedule") {
  auto [g, obs, init] = tiny_setup(50, 6, 2);
  TrainOptions opt;
  opt.max_iters = 7;
  opt.tol = 1e-300;
  opt.checkpoint_every = 3;
  std::vector<int> seen;
  opt.on_checkpoint = [&](int it, const HmmParams&) { seen.push_back(it); };
  (void)train(init, obs, opt);
  CHECK(seen == std::vector<int>{3, 6});
}

TEST_CASE("unrewarded episode is impossible with a single accepting block") {
  const auto g = builtin_grid("tiny");
  ObservationEncoder enc(g, ObservationMode::State);
  const auto p = make_params(spatial_initialization(g, 1, 0.01), 1, g, enc);
  const ObservationSeq obs{enc.encode(0, 0), enc.encode(1, 0)};
  try {
    (void)forward_backward(p, obs);
    FAIL("expected ImpossibleObservation");
  } catch (const ImpossibleObservation& e) {
    CHECK(e.step() == 0);
  }
  const std::vector<ObservationSeq> all{obs};
  CHECK_THROWS_AS(train(p, all), ImpossibleObservation);
}

TEST_CASE("training recovers the product chain on the 2x2 grid") {
  auto [g, obs, init] = tiny_setup(10000, 10, 7);
  const auto r = train(init, obs);
  CHECK(r.report.converged);
  const auto truth = induce_chain(build_product(g, reach_a(g)), uniform_random_policy(g));
  // Only rows of reachable product states carry information.
  const Digraph reach = extract_digraph(truth.transition, 0.0, truth.initial);
  double worst = 0.0;
  for (int i = 0; i < truth.size(); ++i)
    if (reach.present[i]) worst = std::max(worst, (r.params.transition.row(i) - truth.transition.row(i)).cwiseAbs().sum());
  CHECK(worst < 0.05);
}

TEST_CASE("report formats") {
  TrainReport rep;
  rep.iterations = 3;
  rep.converged = true;
  const std::string kv = rep.to_key_value();
  CHECK(kv.find("iterations=3") != std::string::npos);
  CHECK(kv.find("converged=true") != std::string::npos);
  const std::string header = TrainReport::csv_header();
  const std::string row = rep.csv_row();
  CHECK(std::count(header.begin(), header.end(), ',') == std::count(row.begin(), row.end(), ','));
}
