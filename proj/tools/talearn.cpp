// Command-line driver: simulate episodes, learn the product chain, distill, de-bias,
// verify, and benchmark.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/config.hpp"
#include "talearn/debiasing.hpp"
#include "talearn/digraph.hpp"
#include "talearn/distiller.hpp"
#include "talearn/errors.hpp"
#include "talearn/hmm_learner.hpp"
#include "talearn/matrix.hpp"
#include "talearn/mdp_env.hpp"
#include "talearn/pipeline.hpp"
#include "talearn/product_model.hpp"
#include "talearn/scenarios.hpp"

namespace fs = std::filesystem;
using namespace talearn;

namespace {

constexpr int kExitNotEquivalent = 3;

/// Files of one command, written only once every output has been produced.
class Outputs {
 public:
  void add(const std::string& path, std::string content) {
    if (!path.empty()) files_.emplace_back(path, std::move(content));
  }

  void commit() const {
    std::vector<std::string> staged;
    try {
      for (const auto& [path, content] : files_) {
        const std::string tmp = path + ".partial";
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw Error("cannot write '" + path + "'");
        staged.push_back(tmp);
        out << content;
        out.close();
        if (!out) throw Error("cannot write '" + path + "'");
      }
    } catch (...) {
      for (const auto& tmp : staged) fs::remove(tmp);
      throw;
    }
    for (const auto& [path, content] : files_) fs::rename(path + ".partial", path);
  }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<Episode> load_episodes(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open episode file '" + path + "'");
  try {
    return read_episodes(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

Dfa load_automaton(const std::string& path) { return load_task(path); }

template <typename F>
std::string render(F&& write) {
  std::ostringstream out;
  write(out);
  return out.str();
}

std::string automaton_text(const Dfa& dfa) {
  return render([&](std::ostream& o) { write_text(o, dfa); });
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

/// Command-line overrides of config keys.
struct Overrides {
  std::string config_path;
  std::optional<std::string> grid, task, init, observation;
  std::optional<int> episode_length, episodes, k, max_iters, threads, k_max;
  std::optional<std::uint64_t> seed;
  std::optional<double> smoothing, tol, threshold;
  bool reestimate_emissions = false;

  PipelineConfig resolve() const {
    PipelineConfig c = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (grid) c.grid = *grid;
    if (task) c.task = *task;
    if (episode_length) c.episode_length = *episode_length;
    if (episodes) c.episodes = *episodes;
    if (seed) c.seed = *seed;
    if (k) c.k = *k;
    if (init) c.init = parse_init_mode(*init);
    if (smoothing) c.smoothing = *smoothing;
    if (tol) c.tol = *tol;
    if (max_iters) c.max_iters = *max_iters;
    if (threads) c.threads = *threads;
    if (observation) c.observation = parse_observation_mode(*observation);
    if (reestimate_emissions) c.reestimate_emissions = true;
    if (threshold) c.threshold = *threshold;
    if (k_max) c.k_max = *k_max;
    c.validate();
    return c;
  }
};

void add_environment_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config_path, "Pipeline config file")->check(CLI::ExistingFile);
  cmd->add_option("--grid", o.grid, "Grid file or builtin:<name>");
}

void add_simulation_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--task", o.task, "Hidden task automaton file or builtin:<name>");
  cmd->add_option("--episode-length", o.episode_length, "Steps per episode (T)");
  cmd->add_option("--episodes", o.episodes, "Number of episodes");
  cmd->add_option("--seed", o.seed, "Top-level random seed");
}

void add_learning_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--k", o.k, "Guessed number of task automaton states")->check(CLI::PositiveNumber);
  cmd->add_option("--init", o.init, "spatial | uniform")->check(CLI::IsMember({"spatial", "uniform"}));
  cmd->add_option("--smoothing", o.smoothing, "Spatial prior smoothing constant");
  cmd->add_option("--tol", o.tol, "Convergence tolerance on the max absolute row sum change");
  cmd->add_option("--max-iters", o.max_iters, "Pass limit");
  cmd->add_option("--threads", o.threads, "E-step worker threads");
  cmd->add_option("--observation", o.observation, "state | label")->check(CLI::IsMember({"state", "label"}));
  cmd->add_flag("--reestimate-emissions", o.reestimate_emissions, "Re-estimate the emission matrix");
}

// simulate ---------------------------------------------------------------------------

void cmd_simulate(const Overrides& o, const std::string& out_path) {
  const PipelineConfig c = o.resolve();
  const LabelledMdp mdp = load_grid(c.grid);
  const TaskAutomaton ta = fit_to_environment(load_task(c.task), mdp);
  const auto episodes = simulate_episodes(mdp, ta, uniform_random_policy(mdp), c.episode_length, c.episodes, c.seed);
  Outputs outs;
  outs.add(out_path, render([&](std::ostream& s) { write_episodes(s, episodes); }));
  outs.commit();
  std::cout << "episodes=" << episodes.size() << "\nreward_fraction=" << fmt(reward_fraction(episodes)) << "\n";
}

// learn ------------------------------------------------------------------------------

struct LearnArgs {
  std::string episodes, out, report;
  int checkpoint_every = 0;
  std::string checkpoint_prefix;
};

std::vector<std::string> hidden_names(int k, const LabelledMdp& mdp) {
  std::vector<std::string> names;
  for (int q = 0; q < k; ++q)
    for (int s = 0; s < mdp.num_states(); ++s) names.push_back("s" + std::to_string(s) + "_q" + std::to_string(q));
  return names;
}

void cmd_learn(const Overrides& o, const LearnArgs& a) {
  const PipelineConfig c = o.resolve();
  const LabelledMdp mdp = load_grid(c.grid);
  const auto episodes = load_episodes(a.episodes);
  const auto names = hidden_names(c.k, mdp);
  Outputs outs;
  int checkpoints = 0;
  const ObservationEncoder encoder(mdp, c.observation);
  validate_episodes(mdp, episodes);
  if (episodes.empty()) throw PreconditionError("learning needs at least one episode");
  const auto observations = encoder.encode(episodes);
  TrainOptions options;
  options.tol = c.tol;
  options.max_iters = c.max_iters;
  options.threads = c.threads;
  options.reestimate_emissions = c.reestimate_emissions;
  options.checkpoint_every = a.checkpoint_every;
  options.on_checkpoint = [&](int it, const HmmParams& p) {
    ++checkpoints;
    outs.add(a.checkpoint_prefix + std::to_string(it) + ".csv",
             render([&](std::ostream& s) { write_matrix_csv(s, p.transition, names); }));
  };
  auto result = train(initial_params(c, mdp, c.k), observations, options);
  outs.add(a.out, render([&](std::ostream& s) { write_matrix_csv(s, result.params.transition, names); }));
  std::string report = result.report.to_key_value();
  report = "k=" + std::to_string(c.k) + "\ninit=" + to_string(c.init) + "\n" + report;
  outs.add(a.report, report);
  outs.commit();
  std::cout << report;
}

// distill ----------------------------------------------------------------------------

struct DistillArgs {
  std::string matrix, out, dot, nfa_dot, partition_dot;
  std::vector<double> thresholds;
  bool partial_minimize = false;
};

std::string with_suffix(const std::string& path, const std::string& suffix) {
  if (path.empty()) return path;
  fs::path p(path);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

void cmd_distill(const Overrides& o, DistillArgs a) {
  const PipelineConfig c = o.resolve();
  const LabelledMdp mdp = load_grid(c.grid);
  std::ifstream in(a.matrix);
  if (!in) throw PreconditionError("cannot open matrix '" + a.matrix + "'");
  NamedMatrix m = read_matrix_csv(in);
  if (m.values.rows() % mdp.num_states() != 0) throw PreconditionError("matrix size is not a multiple of |S|");
  const int k = static_cast<int>(m.values.rows() / mdp.num_states());
  HmmParams params = make_params(m.values, k, mdp, ObservationEncoder(mdp, ObservationMode::State));
  if (a.thresholds.empty()) a.thresholds.push_back(c.threshold);
  std::sort(a.thresholds.begin(), a.thresholds.end());
  const bool sweep = a.thresholds.size() > 1;
  Outputs outs;
  for (double t : a.thresholds) {
    const std::string suffix = sweep ? "_t" + fmt(t) : "";
    Distillation d = distill_detailed(params, mdp.labels(), mdp.initial_state(), t);
    // Transitions the environment never exercises are free; merging over them gives the
    // smallest automata but may also fold away states that were learned from data.
    if (a.partial_minimize) d.ta = complete(minimize_partial(d.lump.ta));
    outs.add(with_suffix(a.out, suffix), automaton_text(d.ta));
    outs.add(with_suffix(a.dot, suffix), to_dot(d.ta));
    outs.add(with_suffix(a.nfa_dot, suffix), to_dot(d.nfa));
    outs.add(with_suffix(a.partition_dot, suffix), partition_to_dot(d.nfa, d.lump.partition));
    std::cout << "threshold=" << fmt(t) << " nfa_states=" << d.nfa.size() << " nfa_edges=" << d.nfa.num_transitions()
              << " ta_states=" << d.ta.size() << " lump_rounds=" << d.lump.stats.rounds
              << " check_operations=" << d.lump.stats.check_operations << "\n";
  }
  outs.commit();
}

// debias -----------------------------------------------------------------------------

void cmd_debias(const std::string& ta_path, const std::string& episodes_path, const std::string& out,
                const std::string& dot, const std::string& before_dot, const std::string& report) {
  const Dfa ta = load_automaton(ta_path);
  const auto episodes = load_episodes(episodes_path);
  auto r = remove_environmental_bias_detailed(ta, episodes);
  Outputs outs;
  outs.add(out, automaton_text(r.ta));
  outs.add(dot, to_dot(r.ta));
  outs.add(before_dot, to_dot(ta));
  outs.add(report, r.report.to_text());
  outs.commit();
  std::cout << r.report.to_text();
}

// verify -----------------------------------------------------------------------------

int cmd_verify(const std::string& ta_path, const std::string& ref_path, const std::string& grid) {
  const Dfa ta = load_automaton(ta_path);
  const Dfa ref = load_automaton(ref_path);
  const Alphabet sigma = ta.alphabet.merged_with(ref.alphabet);
  const Dfa a = complete(extend_alphabet(ta, sigma));
  const Dfa b = complete(extend_alphabet(ref, sigma));
  bool equal;
  if (grid.empty()) {
    equal = language_equivalent(a, b);
    std::cout << "scope=all_words\n";
  } else {
    const LabelledMdp mdp = load_grid(grid);
    equal = equivalent_on_attainable_traces(mdp, a, b);
    std::cout << "scope=attainable_traces\n";
  }
  std::cout << "equivalent=" << (equal ? "true" : "false") << "\n";
  if (!equal && grid.empty()) {
    const auto w = distinguishing_word(a, b);
    std::string word;
    for (const auto& l : *w) word += (word.empty() ? "" : " ") + l.str();
    std::cout << "distinguishing_word=" << word << "\n";
  }
  return equal ? 0 : kExitNotEquivalent;
}

// bench ------------------------------------------------------------------------------

void cmd_bench(const std::vector<std::string>& configs, int runs, const std::string& out_path) {
  std::ostringstream csv;
  csv << "config,grid,task,k,init,episode_length,episodes,runs,mean_wall_time_seconds,mean_iterations,converged_runs,"
         "equivalent_runs\n";
  for (const auto& path : configs) {
    const PipelineConfig base = load_config(path);
    const LabelledMdp mdp = load_grid(base.grid);
    const TaskAutomaton truth = fit_to_environment(load_task(base.task), mdp);
    double time = 0.0, iterations = 0.0;
    int converged = 0, equivalent = 0;
    for (int r = 0; r < runs; ++r) {
      PipelineConfig c = base;
      c.seed = base.seed + static_cast<std::uint64_t>(r);
      const auto episodes =
          simulate_episodes(mdp, truth, uniform_random_policy(mdp), c.episode_length, c.episodes, c.seed);
      auto trained = learn_product(c, mdp, episodes, c.k);
      time += trained.report.wall_time_seconds;
      iterations += trained.report.iterations;
      converged += trained.report.converged ? 1 : 0;
      try {
        Dfa distilled = distill_ta(trained.params, mdp.labels(), mdp.initial_state(), c.threshold);
        Dfa final_ta = remove_environmental_bias(distilled, episodes);
        equivalent += equivalent_on_attainable_traces(mdp, final_ta, truth) ? 1 : 0;
      } catch (const Error&) {
      }
      std::cerr << path << " run " << r + 1 << "/" << runs << ": " << trained.report.csv_row() << "\n";
    }
    csv << fs::path(path).filename().string() << ',' << base.grid << ',' << base.task << ',' << base.k << ','
        << to_string(base.init) << ',' << base.episode_length << ',' << base.episodes << ',' << runs << ','
        << fmt(time / runs) << ',' << fmt(iterations / runs) << ',' << converged << ',' << equivalent << '\n';
  }
  Outputs outs;
  outs.add(out_path, csv.str());
  outs.commit();
  std::cout << csv.str();
}

// run --------------------------------------------------------------------------------

void cmd_run(const Overrides& o, const std::string& dir) {
  const PipelineConfig c = o.resolve();
  const LabelledMdp mdp = load_grid(c.grid);
  const TaskAutomaton truth = fit_to_environment(load_task(c.task), mdp);
  const auto episodes =
      simulate_episodes(mdp, truth, uniform_random_policy(mdp), c.episode_length, c.episodes, c.seed);
  std::optional<PipelineResult> result;
  std::string sweep_log;
  if (c.k_max > 0) {
    SweepResult sweep = sweep_k(c, mdp, episodes, c.k_max);
    for (const auto& at : sweep.attempts) {
      sweep_log += "k=" + std::to_string(at.k) + " consistent=" + (at.consistent ? "true" : "false") +
                   (at.failure.empty() ? "" : " failure=" + at.failure) + "\n";
    }
    std::cout << sweep_log;
    if (!sweep.chosen) throw StructuralError("no k in 1.." + std::to_string(c.k_max) + " gave a consistent automaton");
    result = std::move(sweep.chosen);
  } else {
    result = learn_task_automaton(c, mdp, episodes, c.k);
  }
  const bool equal = equivalent_on_attainable_traces(mdp, result->final_ta, truth);
  const std::string summary = "k=" + std::to_string(result->k) + "\n" + result->train_report.to_key_value() +
                              result->debias_report.to_text() +
                              "reward_fraction=" + fmt(reward_fraction(episodes)) + "\n" +
                              "equivalent_to_truth=" + (equal ? "true" : "false") + "\n";
  fs::create_directories(dir);
  const fs::path d(dir);
  Outputs outs;
  outs.add((d / "config.ini").string(), render([&](std::ostream& s) { write_config(s, c); }));
  outs.add((d / "episodes.txt").string(), render([&](std::ostream& s) { write_episodes(s, episodes); }));
  outs.add((d / "transition.csv").string(), render([&](std::ostream& s) {
             write_matrix_csv(s, result->learned.transition, hidden_names(result->k, mdp));
           }));
  outs.add((d / "distilled.txt").string(), automaton_text(result->distilled));
  outs.add((d / "distilled.dot").string(), to_dot(result->distilled));
  outs.add((d / "task.txt").string(), automaton_text(result->final_ta));
  outs.add((d / "task.dot").string(), to_dot(result->final_ta));
  outs.add((d / "report.txt").string(), summary + sweep_log);
  outs.commit();
  std::cout << summary;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn task automata from episodes of a labelled gridworld"};
  app.require_subcommand(1);

  Overrides sim_o;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Sample episodes under the uniform random policy");
  add_environment_flags(sim, sim_o);
  add_simulation_flags(sim, sim_o);
  sim->add_option("-o,--out", sim_out, "Episode file to write")->required();

  Overrides learn_o;
  LearnArgs learn_a;
  auto* learn = app.add_subcommand("learn", "Baum-Welch estimate of the product chain");
  add_environment_flags(learn, learn_o);
  add_learning_flags(learn, learn_o);
  learn->add_option("--seed", learn_o.seed, "Seed for the uniform initialization");
  learn->add_option("--episodes", learn_a.episodes, "Episode file")->required()->check(CLI::ExistingFile);
  learn->add_option("-o,--out", learn_a.out, "Transition matrix CSV to write")->required();
  learn->add_option("--report", learn_a.report, "Training report (key=value) to write");
  learn->add_option("--checkpoint-every", learn_a.checkpoint_every, "Write the matrix every N passes");
  learn->add_option("--checkpoint-prefix", learn_a.checkpoint_prefix, "Checkpoint path prefix")
      ->default_val("checkpoint_");

  Overrides distill_o;
  DistillArgs distill_a;
  auto* distill = app.add_subcommand("distill", "Cone Lumping of a learned transition matrix");
  add_environment_flags(distill, distill_o);
  distill->add_option("--matrix", distill_a.matrix, "Transition matrix CSV")->required()->check(CLI::ExistingFile);
  distill->add_option("--threshold", distill_a.thresholds, "Edge threshold; repeat to sweep");
  distill->add_option("-o,--out", distill_a.out, "Task automaton text file to write")->required();
  distill->add_option("--dot", distill_a.dot, "DOT drawing of the task automaton");
  distill->add_option("--nfa-dot", distill_a.nfa_dot, "DOT drawing of the extracted NFA");
  distill->add_option("--partition-dot", distill_a.partition_dot, "DOT drawing of the lumped classes");
  distill->add_flag("--partial-minimize", distill_a.partial_minimize,
                    "Merge states that agree wherever both have transitions before completing");

  std::string db_ta, db_eps, db_out, db_dot, db_before, db_report;
  auto* debias = app.add_subcommand("debias", "Remove environmental bias and minimize");
  debias->add_option("--ta", db_ta, "Task automaton text file")->required()->check(CLI::ExistingFile);
  debias->add_option("--episodes", db_eps, "Episode file")->required()->check(CLI::ExistingFile);
  debias->add_option("-o,--out", db_out, "Task automaton text file to write")->required();
  debias->add_option("--dot", db_dot, "DOT drawing of the result");
  debias->add_option("--before-dot", db_before, "DOT drawing of the input");
  debias->add_option("--report", db_report, "Removal report to write");

  std::string v_ta, v_ref, v_grid;
  auto* verify = app.add_subcommand("verify", "Compare two task automata (exit 3 when they differ)");
  verify->add_option("--ta", v_ta, "Task automaton")->required();
  verify->add_option("--reference", v_ref, "Reference task automaton")->required();
  verify->add_option("--grid", v_grid, "Restrict the comparison to traces attainable in this grid");

  std::vector<std::string> bench_configs;
  int bench_runs = 3;
  std::string bench_out;
  auto* bench = app.add_subcommand("bench", "Mean convergence time over seeded runs, one CSV row per config");
  bench->add_option("configs", bench_configs, "Config files")->required()->check(CLI::ExistingFile);
  bench->add_option("--runs", bench_runs, "Runs per config (seeds seed, seed+1, ...)")->check(CLI::PositiveNumber);
  bench->add_option("-o,--out", bench_out, "CSV file to write");

  Overrides run_o;
  std::string run_dir;
  auto* run = app.add_subcommand("run", "Simulate, learn, distill and de-bias in one go");
  add_environment_flags(run, run_o);
  add_simulation_flags(run, run_o);
  add_learning_flags(run, run_o);
  run->add_option("--threshold", run_o.threshold, "Edge threshold for distillation");
  run->add_option("--k-max", run_o.k_max, "Sweep k = 1..k_max instead of using --k");
  run->add_option("-o,--out-dir", run_dir, "Directory for all outputs")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) cmd_simulate(sim_o, sim_out);
    if (*learn) cmd_learn(learn_o, learn_a);
    if (*distill) cmd_distill(distill_o, distill_a);
    if (*debias) cmd_debias(db_ta, db_eps, db_out, db_dot, db_before, db_report);
    if (*verify) return cmd_verify(v_ta, v_ref, v_grid);
    if (*bench) cmd_bench(bench_configs, bench_runs, bench_out);
    if (*run) cmd_run(run_o, run_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
