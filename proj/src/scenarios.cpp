#include "talearn/scenarios.hpp"

#include <fstream>
#include <sstream>
#include <utility>

#include "talearn/errors.hpp"

namespace talearn {

namespace {

using Entry = std::pair<std::string_view, std::string_view>;

constexpr Entry kGrids[] = {
    {"cone_example", R"(# Coffee-then-stairs example grid; s_yx is the cell in row y, column x.
size 3 3
initial 0 0
stairs . .
. . coffee
. . coffee
)"},
    {"grid3", R"(# 3x3 experiment grid
size 3 3
initial 0 0
stairs . tv
. couch .
carpet . coffee
)"},
    {"grid4", R"(# 4x4 experiment grid
size 4 4
initial 0 0
stairs . . tv
. . couch .
. carpet . .
. . . coffee
)"},
    {"grid5", R"(# 5x5 experiment grid
size 5 5
initial 0 0
stairs . . . tv
. . . . .
. . couch . .
. carpet . . .
. . . . coffee
)"},
    {"case_study", R"(# Case-study grid: every path to the book crosses a carpet cell.
size 5 5
initial 0 0
book carpet . . stairs
carpet . . tv .
. . couch . .
. . . . .
. . . coffee .
)"},
    {"tiny", R"(# 2x2 grid
size 2 2
initial 0 0
. b
. a
)"},
};

constexpr Entry kTasks[] = {
    {"coffee_stairs", R"(# Get coffee, then go upstairs.
alphabet . coffee stairs
states q0 q1 q2
initial q0
accepting q2
q0 coffee q1
q1 stairs q2
)"},
    {"coffee_couch_stairs", R"(# Get coffee, serve it at the couch, then go upstairs.
alphabet . coffee couch stairs
states q0 q1 q2 q3
initial q0
accepting q3
q0 coffee q1
q1 couch q2
q2 stairs q3
)"},
    {"coffee_couch_tv_stairs", R"(# Get coffee, serve it at the couch, turn on the TV, then go upstairs.
alphabet . coffee couch tv stairs
states q0 q1 q2 q3 q4
initial q0
accepting q4
q0 coffee q1
q1 couch q2
q2 tv q3
q3 stairs q4
)"},
    {"book", R"(# Pick up the book.
alphabet . book
states q0 q1
initial q0
accepting q1
q0 book q1
)"},
    {"carpet_book", R"(# Pick up the book after visiting the carpet.
alphabet . book carpet
states q0 q1 q2
initial q0
accepting q2
q0 carpet q1
q1 book q2
)"},
};

template <std::size_t N>
std::string_view lookup(const Entry (&table)[N], std::string_view name, const char* kind) {
  for (const auto& [key, text] : table)
    if (key == name) return text;
  throw PreconditionError("unknown built-in " + std::string(kind) + " '" + std::string(name) + "'");
}

template <std::size_t N>
std::vector<std::string> names_of(const Entry (&table)[N]) {
  std::vector<std::string> out;
  for (const auto& e : table) out.emplace_back(e.first);
  return out;
}

constexpr std::string_view kBuiltinPrefix = "builtin:";

template <typename Reader>
auto load(const std::string& spec, Reader read, std::string_view (*builtin)(std::string_view)) {
  if (spec.starts_with(kBuiltinPrefix)) {
    std::istringstream in{std::string(builtin(std::string_view(spec).substr(kBuiltinPrefix.size())))};
    return read(in);
  }
  std::ifstream in(spec);
  if (!in) throw PreconditionError("cannot open '" + spec + "'");
  try {
    return read(in);
  } catch (const ParseError& e) {
    throw ParseError(spec + ": " + e.what(), 0);
  }
}

}  // namespace

std::vector<std::string> builtin_grid_names() { return names_of(kGrids); }
std::vector<std::string> builtin_task_names() { return names_of(kTasks); }
std::string_view builtin_grid_text(std::string_view name) { return lookup(kGrids, name, "grid"); }
std::string_view builtin_task_text(std::string_view name) { return lookup(kTasks, name, "task"); }

LabelledMdp builtin_grid(std::string_view name) {
  std::istringstream in{std::string(builtin_grid_text(name))};
  return read_grid(in);
}

TaskAutomaton builtin_task(std::string_view name) {
  std::istringstream in{std::string(builtin_task_text(name))};
  return read_dfa_text(in);
}

LabelledMdp load_grid(const std::string& spec) {
  return load(spec, [](std::istream& in) { return read_grid(in); }, &builtin_grid_text);
}

TaskAutomaton load_task(const std::string& spec) {
  return load(spec, [](std::istream& in) { return read_dfa_text(in); }, &builtin_task_text);
}

TaskAutomaton fit_to_environment(const TaskAutomaton& ta, const LabelledMdp& mdp) {
  return complete(extend_alphabet(ta, ta.alphabet.merged_with(mdp.label_alphabet())), Completion::SelfLoop);
}

}  // namespace talearn
