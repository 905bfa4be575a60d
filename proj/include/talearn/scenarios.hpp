#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "talearn/automata.hpp"
#include "talearn/mdp_env.hpp"

namespace talearn {

/// Built-in environments and task automata, stored in the same text formats as the
/// files under data/.
///
/// Grids: "cone_example" (3x3 coffee/stairs grid used to illustrate Cone Lumping),
/// "grid3", "grid4", "grid5" (experiment grids), "case_study" (5x5 grid with the book
/// behind a carpet), "tiny" (2x2).
/// Tasks: "coffee_stairs", "coffee_couch_stairs", "coffee_couch_tv_stairs", "book",
/// "carpet_book".
std::vector<std::string> builtin_grid_names();
std::vector<std::string> builtin_task_names();
/// Throws PreconditionError for an unknown name.
std::string_view builtin_grid_text(std::string_view name);
std::string_view builtin_task_text(std::string_view name);

LabelledMdp builtin_grid(std::string_view name);
TaskAutomaton builtin_task(std::string_view name);

/// Reads "builtin:<name>" or a file path.
LabelledMdp load_grid(const std::string& spec);
TaskAutomaton load_task(const std::string& spec);

/// `ta` over the union of its alphabet and the MDP's labels, completed with self-loops.
TaskAutomaton fit_to_environment(const TaskAutomaton& ta, const LabelledMdp& mdp);

}  // namespace talearn
