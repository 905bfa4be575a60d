#include "talearn/hmm_learner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>
#include <utility>

#include "talearn/errors.hpp"
#include "talearn/rng.hpp"

namespace talearn {

namespace {

constexpr std::size_t kChunkSize = 32;

/// For each observation, the hidden states that can emit it with their probability.
using Support = std::vector<std::vector<std::pair<int, double>>>;

Support emission_support(const Matrix& emission) {
  Support support(emission.cols());
  for (Eigen::Index i = 0; i < emission.rows(); ++i)
    for (Eigen::Index o = 0; o < emission.cols(); ++o)
      if (emission(i, o) > 0.0) support[o].emplace_back(static_cast<int>(i), emission(i, o));
  return support;
}

struct Accumulator {
  Matrix xi;
  Vector gamma_head;  // Σ over t < T-1
  Vector gamma_all;
  Matrix emission_num;
  double log_likelihood = 0.0;

  Accumulator(int n, int n_obs, bool emissions)
      : xi(Matrix::Zero(n, n)), gamma_head(Vector::Zero(n)), gamma_all(Vector::Zero(n)) {
    if (emissions) emission_num = Matrix::Zero(n, n_obs);
  }

  void add(const Accumulator& other) {
    xi += other.xi;
    gamma_head += other.gamma_head;
    gamma_all += other.gamma_all;
    if (emission_num.size() > 0) emission_num += other.emission_num;
    log_likelihood += other.log_likelihood;
  }
};

void check_observations(const HmmParams& params, const ObservationSeq& obs) {
  if (obs.empty()) throw PreconditionError("observation sequence is empty");
  for (int o : obs)
    if (o < 0 || o >= params.n_observations()) throw PreconditionError("observation index out of range");
}

/// Scaled forward-backward over the emission supports. Adds expected counts to `acc`;
/// writes the posterior marginals into `gamma` when it is non-null.
void accumulate(const HmmParams& params, const Support& support, const ObservationSeq& obs, Accumulator& acc,
                Matrix* gamma) {
  check_observations(params, obs);
  const std::size_t T = obs.size();
  const Matrix& P = params.transition;
  std::vector<std::vector<double>> alpha(T), beta(T);
  std::vector<double> scale(T);

  double log_lik = 0.0;
  for (std::size_t t = 0; t < T; ++t) {
    const auto& cur = support[obs[t]];
    auto& a = alpha[t];
    a.assign(cur.size(), 0.0);
    if (t == 0) {
      for (std::size_t j = 0; j < cur.size(); ++j) a[j] = params.initial(cur[j].first) * cur[j].second;
    } else {
      const auto& prev = support[obs[t - 1]];
      const auto& ap = alpha[t - 1];
      for (std::size_t j = 0; j < cur.size(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < prev.size(); ++i) sum += ap[i] * P(prev[i].first, cur[j].first);
        a[j] = sum * cur[j].second;
      }
    }
    double c = 0.0;
    for (double v : a) c += v;
    if (!(c > 0.0)) throw ImpossibleObservation(t);
    for (double& v : a) v /= c;
    scale[t] = c;
    log_lik += std::log(c);
  }

  beta[T - 1].assign(support[obs[T - 1]].size(), 1.0);
  for (std::size_t t = T - 1; t-- > 0;) {
    const auto& cur = support[obs[t]];
    const auto& next = support[obs[t + 1]];
    const auto& bn = beta[t + 1];
    auto& b = beta[t];
    b.assign(cur.size(), 0.0);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < next.size(); ++j) sum += P(cur[i].first, next[j].first) * next[j].second * bn[j];
      b[i] = sum / scale[t + 1];
    }
  }

  for (std::size_t t = 0; t < T; ++t) {
    const auto& cur = support[obs[t]];
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double g = alpha[t][i] * beta[t][i];
      const int si = cur[i].first;
      acc.gamma_all(si) += g;
      if (t + 1 < T) acc.gamma_head(si) += g;
      if (acc.emission_num.size() > 0) acc.emission_num(si, obs[t]) += g;
      if (gamma) (*gamma)(static_cast<Eigen::Index>(t), si) = g;
    }
    if (t + 1 == T) continue;
    const auto& next = support[obs[t + 1]];
    for (std::size_t i = 0; i < cur.size(); ++i) {
      const double ai = alpha[t][i] / scale[t + 1];
      if (ai == 0.0) continue;
      for (std::size_t j = 0; j < next.size(); ++j) {
        acc.xi(cur[i].first, next[j].first) += ai * P(cur[i].first, next[j].first) * next[j].second * beta[t + 1][j];
      }
    }
  }
  acc.log_likelihood += log_lik;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

}  // namespace

ObservationEncoder::ObservationEncoder(const LabelledMdp& mdp, ObservationMode mode) : mode_(mode) {
  const int n = mdp.num_states();
  symbol_of_state_.resize(n);
  if (mode == ObservationMode::State) {
    num_symbols_ = n;
    for (int s = 0; s < n; ++s) symbol_of_state_[s] = s;
  } else {
    const Alphabet labels = mdp.label_alphabet();
    num_symbols_ = static_cast<int>(labels.size());
    for (int s = 0; s < n; ++s) symbol_of_state_[s] = static_cast<int>(labels.index(mdp.label(s)));
  }
}

ObservationSeq ObservationEncoder::encode(const Episode& episode) const {
  ObservationSeq seq(episode.length());
  for (std::size_t t = 0; t < episode.length(); ++t) seq[t] = encode(episode.states[t], episode.rewards[t]);
  return seq;
}

std::vector<ObservationSeq> ObservationEncoder::encode(std::span<const Episode> episodes) const {
  std::vector<ObservationSeq> out;
  out.reserve(episodes.size());
  for (const auto& e : episodes) out.push_back(encode(e));
  return out;
}

void HmmParams::validate(double tol) const {
  const auto n = transition.rows();
  if (transition.cols() != n || emission.rows() != n || initial.size() != n) {
    throw PreconditionError("HMM parameter shapes disagree");
  }
  if ((transition.array() < 0).any() || (emission.array() < 0).any() || (initial.array() < 0).any()) {
    throw PreconditionError("HMM parameters have negative entries");
  }
  if (!is_row_stochastic(transition, tol)) throw PreconditionError("transition matrix is not row-stochastic");
  if (!is_row_stochastic(emission, tol)) throw PreconditionError("emission matrix is not row-stochastic");
  if (std::abs(initial.sum() - 1.0) > tol) throw PreconditionError("initial distribution does not sum to one");
}

Matrix build_emission_matrix(int k, int n_states) {
  if (k < 1 || n_states < 1) throw PreconditionError("emission matrix needs k >= 1 and at least one state");
  Matrix e = Matrix::Zero(static_cast<Eigen::Index>(k) * n_states, 2 * n_states);
  for (int q = 0; q < k; ++q) {
    const int bit = q == k - 1 ? 1 : 0;
    for (int s = 0; s < n_states; ++s) e(q * n_states + s, bit * n_states + s) = 1.0;
  }
  return e;
}

Vector initial_distribution(int k, int n_states, StateId initial_state) {
  if (k < 1 || initial_state < 0 || initial_state >= n_states) throw PreconditionError("bad initial distribution");
  Vector rho = Vector::Zero(static_cast<Eigen::Index>(k) * n_states);
  rho(initial_state) = 1.0;
  return rho;
}

Matrix spatial_initialization(const LabelledMdp& mdp, int k, double smoothing) {
  if (k < 1) throw PreconditionError("k must be at least 1");
  if (!(smoothing > 0.0)) throw PreconditionError("smoothing must be positive");
  const Matrix q = induced_chain(mdp, uniform_random_policy(mdp));
  Matrix lifted = kronecker(Matrix::Identity(k, k), q);
  const double eps = smoothing / (static_cast<double>(k) * mdp.num_states());
  lifted = (lifted.array() == 0.0).select(eps, lifted);
  normalize_rows(lifted);
  return lifted;
}

Matrix uniform_initialization(int n_hidden, std::uint64_t seed) {
  if (n_hidden < 1) throw PreconditionError("need at least one hidden state");
  auto rng = substream(seed, 0);
  Matrix m(n_hidden, n_hidden);
  for (int i = 0; i < n_hidden; ++i)
    for (int j = 0; j < n_hidden; ++j) m(i, j) = positive_unit_uniform(rng);
  normalize_rows(m);
  return m;
}

HmmParams make_params(Matrix transition, int k, const LabelledMdp& mdp, const ObservationEncoder& encoder) {
  const int ns = mdp.num_states();
  if (transition.rows() != static_cast<Eigen::Index>(k) * ns || transition.cols() != transition.rows()) {
    throw PreconditionError("transition matrix is not k*|S| square");
  }
  HmmParams p;
  p.transition = std::move(transition);
  if (encoder.mode() == ObservationMode::State) {
    p.emission = build_emission_matrix(k, ns);
  } else {
    p.emission = Matrix::Zero(static_cast<Eigen::Index>(k) * ns, encoder.num_observations());
    for (int q = 0; q < k; ++q)
      for (int s = 0; s < ns; ++s) p.emission(q * ns + s, encoder.encode(s, q == k - 1 ? 1 : 0)) = 1.0;
  }
  p.initial = initial_distribution(k, ns, mdp.initial_state());
  return p;
}

ForwardBackwardResult forward_backward(const HmmParams& params, const ObservationSeq& obs) {
  const int n = params.n_hidden();
  const Support support = emission_support(params.emission);
  Accumulator acc(n, params.n_observations(), false);
  ForwardBackwardResult r;
  r.gamma = Matrix::Zero(static_cast<Eigen::Index>(obs.size()), n);
  accumulate(params, support, obs, acc, &r.gamma);
  r.xi = std::move(acc.xi);
  r.log_likelihood = acc.log_likelihood;
  return r;
}

double log_likelihood(const HmmParams& params, const ObservationSeq& obs) {
  return forward_backward(params, obs).log_likelihood;
}

PassResult baum_welch_pass(const HmmParams& params, std::span<const ObservationSeq> episodes,
                           const PassOptions& options) {
  if (episodes.empty()) throw PreconditionError("Baum-Welch needs at least one episode");
  const int n = params.n_hidden();
  const Support support = emission_support(params.emission);
  const std::size_t num_chunks = (episodes.size() + kChunkSize - 1) / kChunkSize;
  std::vector<Accumulator> chunks(num_chunks, Accumulator(n, params.n_observations(), options.reestimate_emissions));

  auto run_chunk = [&](std::size_t c) {
    const std::size_t end = std::min(episodes.size(), (c + 1) * kChunkSize);
    for (std::size_t e = c * kChunkSize; e < end; ++e) accumulate(params, support, episodes[e], chunks[c], nullptr);
  };
  const int threads = std::clamp<int>(options.threads, 1, static_cast<int>(num_chunks));
  if (threads == 1) {
    for (std::size_t c = 0; c < num_chunks; ++c) run_chunk(c);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(num_chunks);
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
      pool.emplace_back([&] {
        for (std::size_t c; (c = next.fetch_add(1)) < num_chunks;) {
          try {
            run_chunk(c);
          } catch (...) {
            failures[c] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }

  Accumulator total(n, params.n_observations(), options.reestimate_emissions);
  for (const auto& c : chunks) total.add(c);

  PassResult r;
  r.params = params;
  r.log_likelihood = total.log_likelihood;
  for (int i = 0; i < n; ++i) {
    if (total.gamma_head(i) > 0.0) {
      r.params.transition.row(i) = total.xi.row(i) / total.gamma_head(i);
    } else {
      r.zero_visit_rows.push_back(i);
    }
    if (options.reestimate_emissions && total.gamma_all(i) > 0.0) {
      r.params.emission.row(i) = total.emission_num.row(i) / total.gamma_all(i);
    }
  }
  normalize_rows(r.params.transition);
  if (options.reestimate_emissions) normalize_rows(r.params.emission);
  r.delta = max_abs_row_sum_diff(r.params.transition, params.transition);
  return r;
}

TrainResult train(const HmmParams& init, std::span<const ObservationSeq> episodes, const TrainOptions& options) {
  if (!(options.tol > 0.0)) throw PreconditionError("tolerance must be positive");
  if (options.max_iters < 1) throw PreconditionError("max_iters must be at least 1");
  init.validate();
  const auto start = std::chrono::steady_clock::now();
  TrainResult out{init, {}};
  PassOptions pass{options.reestimate_emissions, options.threads};
  for (int it = 1; it <= options.max_iters; ++it) {
    PassResult r = baum_welch_pass(out.params, episodes, pass);
    if (!all_finite(r.params.transition) || !all_finite(r.params.emission) || !std::isfinite(r.delta)) {
      throw NumericalFailure(it);
    }
    out.params = std::move(r.params);
    out.report.iterations = it;
    out.report.final_delta = r.delta;
    out.report.log_likelihood_trace.push_back(r.log_likelihood);
    out.report.zero_visit_rows = std::move(r.zero_visit_rows);
    if (options.checkpoint_every > 0 && options.on_checkpoint && it % options.checkpoint_every == 0) {
      options.on_checkpoint(it, out.params);
    }
    if (r.delta < options.tol) {
      out.report.converged = true;
      break;
    }
  }
  out.report.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

std::string TrainReport::to_key_value() const {
  std::ostringstream out;
  char buf[64];
  out << "iterations=" << iterations << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", final_delta);
  out << "final_delta=" << buf << '\n';
  out << "converged=" << (converged ? "true" : "false") << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", log_likelihood_trace.empty() ? 0.0 : log_likelihood_trace.back());
  out << "log_likelihood=" << buf << '\n';
  std::snprintf(buf, sizeof buf, "%.6f", wall_time_seconds);
  out << "wall_time_seconds=" << buf << '\n';
  out << "zero_visit_rows=" << zero_visit_rows.size() << '\n';
  out << "log_likelihood_trace=";
  for (std::size_t i = 0; i < log_likelihood_trace.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", log_likelihood_trace[i]);
    out << (i ? "," : "") << buf;
  }
  out << '\n';
  return out.str();
}

std::string TrainReport::csv_header() { return "iterations,final_delta,converged,log_likelihood,wall_time_seconds"; }

std::string TrainReport::csv_row() const {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%d,%.6g,%d,%.10g,%.6f", iterations, final_delta, converged ? 1 : 0,
                log_likelihood_trace.empty() ? 0.0 : log_likelihood_trace.back(), wall_time_seconds);
  return buf;
}

}  // namespace talearn
