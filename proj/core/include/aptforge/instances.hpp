#pragma once

#include "aptforge/mdp.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace aptforge {

// ---------------------------------------------------------------- random

struct RandomMdpOptions {
  bool special = false;
  double reward_low = -1.0;
  double reward_high = 1.0;
  double gamma = 0.9;
  /// Probability that a next state is kept in a row's support (at least one always is).
  double density = 0.5;
  /// Same for the initial distribution.
  double sigma_density = 0.5;
};

/// Seeded random MDP with sparse Dirichlet(1) rows. With `special`, every action at a
/// state shares one next-state row.
Mdp random_mdp(std::uint64_t seed, int n_states, int n_actions, const RandomMdpOptions& options = {});

/// Random admissible mask where every state keeps at least one action with probability
/// `keep_nonempty`, and each action is admissible with probability `density`.
AdmissibleSet random_admissible(std::uint64_t seed, int n_states, int n_actions, double density = 0.6,
                                double keep_nonempty = 1.0);

// ---------------------------------------------------------------- grids

enum class Direction { up, down, left, right };

std::string to_string(Direction d);
Direction parse_direction(const std::string& name);

enum class CellKind { start, goal, blocked, cliff, grass, mud, ordinary };

struct Slip {
  int row = 0;
  int col = 0;
  Direction action = Direction::right;
  Direction actual = Direction::up;
  double probability = 0.0;
};

struct ForbiddenMove {
  int row = 0;
  int col = 0;
  Direction action = Direction::right;
};

/// How actions that do not exist at a state are encoded in the fixed-width table.
enum class AbsentActions {
  /// Copy the dynamics of the state's first real action and pay `absent_reward`.
  penalty,
  /// Stay in place and pay the state's usual reward.
  stay,
};

struct GridSpec {
  std::string name;
  /// One string per row. S start, G goal, 1-9 labelled goal, # blocked, C cliff,
  /// g grass, m mud, . ordinary.
  std::vector<std::string> cells;
  std::vector<Direction> actions{Direction::up, Direction::down, Direction::left, Direction::right};
  double step_reward = -1.0;
  double goal_reward = 0.0;
  double grass_reward = 0.0;
  double mud_reward = 0.0;
  std::map<char, double> goal_rewards;
  std::vector<Slip> slips;
  /// Moves whose intended destination has one of these kinds are inadmissible.
  std::vector<CellKind> inadmissible_kinds;
  std::vector<ForbiddenMove> inadmissible_moves;
  AbsentActions absent = AbsentActions::penalty;
  /// Defaults to a value far below every real reward.
  std::optional<double> absent_reward;
  double gamma = 0.9;
};

struct GridInstance {
  explicit GridInstance(Mdp m) : mdp(std::move(m)) {}

  Mdp mdp;
  AdmissibleSet admissible;
  /// State index for each (row, col); -1 for blocked cells.
  std::vector<std::vector<int>> state_of;
  std::vector<std::pair<int, int>> cell_of;
  /// True where the action does not exist at the state.
  ActionMask absent;
  std::vector<CellKind> kind;
  std::vector<char> code;
  int start = 0;
};

/// Parses a GridSpec from JSON text; throws BadSpec / Parse.
GridSpec parse_grid_spec(const std::string& json_text);
GridSpec load_grid_spec(const std::string& path);

GridInstance grid_from_config(const GridSpec& spec);

// ---------------------------------------------------------------- X3C

struct X3cInstance {
  int k = 0;
  /// 1-based element ids, three per subset.
  std::vector<std::vector<int>> subsets;
};

struct X3cReduction {
  explicit X3cReduction(Mdp m) : mdp(std::move(m)) {}

  Mdp mdp;
  AdmissibleSet admissible;
  X3cInstance instance;
  double epsilon = 0.0;
  double gamma = 0.0;
  double p = 0.0;
  std::int64_t n_copies = 0;
  double m = 0.0;
  double delta = 0.0;
  double phi = 0.0;
  double xi = 0.0;
  double x = 0.0;
  double y = 0.0;

  int s0 = 0;
  /// element_state[c][i] is s_{i+1} in copy c.
  std::vector<std::vector<int>> element_state;
  std::vector<int> star_state;
  std::vector<int> tilde0_state;
  std::vector<int> tilde1_state;
  std::vector<int> subset_state;
  int final_state = 0;
  static constexpr int kDagger = 0;
  /// Action index of a_j (1-based j).
  static int subset_action(int j) { return j; }
};

inline constexpr double kMaxReductionStates = 1e6;

/// Full N from the φ formula.
double x3c_full_copies(const X3cInstance& instance, double gamma, double p);

X3cReduction x3c_reduction(const X3cInstance& instance, double epsilon, double gamma, double p,
                           std::optional<std::int64_t> n_override = std::nullopt);

/// True when the listed subsets (1-based) partition the elements.
bool is_exact_cover(const X3cInstance& instance, const std::vector<int>& cover);

/// Reward table with ω_j raised to 1 for each j in the cover.
RewardTable x3c_yes_certificate(const X3cReduction& reduction, const std::vector<int>& cover);

}  // namespace aptforge
