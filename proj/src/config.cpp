#include "talearn/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <fstream>
#include <optional>
#include <ostream>
#include <set>

#include "talearn/errors.hpp"

namespace talearn {

namespace pt = boost::property_tree;

namespace {

const std::set<std::string> kKeys = {
    "environment.grid",      "environment.task",         "simulation.episode_length", "simulation.episodes",
    "simulation.seed",       "learning.k",               "learning.init",             "learning.smoothing",
    "learning.tol",          "learning.max_iters",       "learning.threads",          "learning.observation",
    "learning.reestimate_emissions", "distill.threshold", "distill.k_max",
};

template <typename T>
void read_key(const pt::ptree& tree, const std::string& key, T& out) {
  auto node = tree.get_child_optional(pt::ptree::path_type(key, '.'));
  if (!node) return;
  auto value = node->get_value_optional<T>();
  if (!value) throw ParseError("invalid value '" + node->data() + "' for key " + key, 0);
  out = *value;
}

std::optional<std::string> read_text(const pt::ptree& tree, const std::string& key) {
  if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return *v;
  return std::nullopt;
}

bool parse_bool(const std::string& key, const std::string& s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ParseError("invalid boolean '" + s + "' for key " + key, 0);
}

}  // namespace

InitMode parse_init_mode(const std::string& s) {
  if (s == "spatial") return InitMode::Spatial;
  if (s == "uniform") return InitMode::Uniform;
  throw PreconditionError("unknown init mode '" + s + "' (expected spatial or uniform)");
}

const char* to_string(InitMode m) { return m == InitMode::Spatial ? "spatial" : "uniform"; }

ObservationMode parse_observation_mode(const std::string& s) {
  if (s == "state") return ObservationMode::State;
  if (s == "label") return ObservationMode::Label;
  throw PreconditionError("unknown observation mode '" + s + "' (expected state or label)");
}

const char* to_string(ObservationMode m) { return m == ObservationMode::State ? "state" : "label"; }

void PipelineConfig::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw PreconditionError(what);
  };
  require(episode_length >= 1, "simulation.episode_length must be at least 1");
  require(episodes >= 0, "simulation.episodes must be non-negative");
  require(k >= 1, "learning.k must be at least 1");
  require(smoothing > 0.0, "learning.smoothing must be positive");
  require(tol > 0.0, "learning.tol must be positive");
  require(max_iters >= 1, "learning.max_iters must be at least 1");
  require(threads >= 1, "learning.threads must be at least 1");
  require(threshold >= 0.0 && threshold < 1.0, "distill.threshold must lie in [0, 1)");
  require(k_max >= 0, "distill.k_max must be non-negative");
}

PipelineConfig read_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError(e.message(), e.line());
  }
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ParseError("key '" + section + "' is outside a [section]", 0);
    for (const auto& [key, value] : body) {
      if (!kKeys.contains(section + "." + key)) throw ParseError("unknown key " + section + "." + key, 0);
    }
  }
  PipelineConfig c;
  read_key(tree, "environment.grid", c.grid);
  read_key(tree, "environment.task", c.task);
  read_key(tree, "simulation.episode_length", c.episode_length);
  read_key(tree, "simulation.episodes", c.episodes);
  read_key(tree, "simulation.seed", c.seed);
  read_key(tree, "learning.k", c.k);
  if (auto text = read_text(tree, "learning.init")) c.init = parse_init_mode(*text);
  read_key(tree, "learning.smoothing", c.smoothing);
  read_key(tree, "learning.tol", c.tol);
  read_key(tree, "learning.max_iters", c.max_iters);
  read_key(tree, "learning.threads", c.threads);
  if (auto text = read_text(tree, "learning.observation")) c.observation = parse_observation_mode(*text);
  if (auto text = read_text(tree, "learning.reestimate_emissions")) {
    c.reestimate_emissions = parse_bool("learning.reestimate_emissions", *text);
  }
  read_key(tree, "distill.threshold", c.threshold);
  read_key(tree, "distill.k_max", c.k_max);
  c.validate();
  return c;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError("cannot open config '" + path + "'");
  try {
    return read_config(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what(), 0);
  }
}

void write_config(std::ostream& out, const PipelineConfig& c) {
  out << "[environment]\ngrid = " << c.grid << "\ntask = " << c.task << "\n\n";
  out << "[simulation]\nepisode_length = " << c.episode_length << "\nepisodes = " << c.episodes
      << "\nseed = " << c.seed << "\n\n";
  out << "[learning]\nk = " << c.k << "\ninit = " << to_string(c.init) << "\nsmoothing = " << c.smoothing
      << "\ntol = " << c.tol << "\nmax_iters = " << c.max_iters << "\nthreads = " << c.threads
      << "\nobservation = " << to_string(c.observation)
      << "\nreestimate_emissions = " << (c.reestimate_emissions ? "true" : "false") << "\n\n";
  out << "[distill]\nthreshold = " << c.threshold << "\nk_max = " << c.k_max << "\n";
}

}  // namespace talearn
