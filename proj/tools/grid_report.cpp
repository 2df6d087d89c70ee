// Prints the four strategy objectives for grid configs, with the forced policies drawn
// on the grid. Used to check layout reconstructions against reference numbers.
#include "aptforge/error.hpp"
#include "aptforge/instances.hpp"
#include "aptforge/policy_search.hpp"

#include <cstdio>
#include <iostream>
#include <string>

using namespace aptforge;

namespace {

char arrow(Direction d) {
  switch (d) {
    case Direction::up: return '^';
    case Direction::down: return 'v';
    case Direction::left: return '<';
    case Direction::right: return '>';
  }
  return '?';
}

void draw(const GridSpec& spec, const GridInstance& g, const DesignOutcome& o) {
  const auto occ = occupancy(g.mdp, o.policy);
  for (size_t r = 0; r < spec.cells.size(); ++r) {
    std::string line;
    for (size_t c = 0; c < spec.cells[r].size(); ++c) {
      const int s = g.state_of[r][c];
      char ch = spec.cells[r][c];
      if (s >= 0 && occ.visited(s) && g.kind[static_cast<size_t>(s)] != CellKind::goal) {
        ch = arrow(spec.actions[static_cast<size_t>(o.policy[s])]);
      }
      line += ch;
    }
    std::cout << "    " << line << "   " << spec.cells[r] << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: grid_report CONFIG.json [--draw] [lambda] [epsilon]\n";
    return 2;
  }
  bool show = false;
  double lambda = 1.0;
  double epsilon = 0.1;
  std::vector<std::string> rest;
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--draw") show = true; else rest.push_back(a);
  }
  if (!rest.empty()) lambda = std::stod(rest[0]);
  if (rest.size() > 1) epsilon = std::stod(rest[1]);
  try {
    const GridSpec spec = load_grid_spec(argv[1]);
    const GridInstance g = grid_from_config(spec);
    std::printf("%s: %d states, %d actions\n", spec.name.c_str(), g.mdp.n_states(), g.mdp.n_actions());
    for (auto st : {Strategy::opt, Strategy::opt_adm, Strategy::qgreedy, Strategy::constrain_optimize}) {
      const auto o = design(g.mdp, g.admissible, st, lambda, epsilon);
      std::printf("  %-20s objective %9.4f  cost %9.4f  score %9.4f  %s  %s\n", to_string(st).c_str(), o.objective,
                  o.cost, o.score, o.admissible ? "adm" : "INADM", o.diagnostics.method.c_str());
      if (show) draw(spec, g, o);
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  return 0;
}
