#pragma once

#include "aptforge/attack.hpp"
#include "aptforge/mdp.hpp"

#include <string>
#include <vector>

namespace aptforge {

enum class Strategy { opt, opt_adm, qgreedy, constrain_optimize, special };

std::string to_string(Strategy strategy);
/// Parses "opt", "opt-adm", "qgreedy", "constrain-optimize", "special".
Strategy parse_strategy(const std::string& name);

/// A designed reward together with the policy it forces and the objective
/// cost - λ·ρ^{π,R̄}. `phi` adds back λ·ρ^{π*,R̄}: cost + λ(ρ* - ρ^π).
struct DesignOutcome {
  std::string strategy;
  DetPolicy policy;
  RewardTable r_hat;
  double cost = 0.0;
  double score = 0.0;
  double objective = 0.0;
  double lambda = 0.0;
  double epsilon = 0.0;
  double phi = 0.0;
  double optimal_score = 0.0;
  /// False when the forced policy takes an inadmissible action on a visited state.
  bool admissible = true;
  SolverDiagnostics diagnostics;
  FeasibilityReport feasibility;
};

/// Assembles an outcome from an attack that forces `policy`.
DesignOutcome make_outcome(const Mdp& mdp, const AdmissibleSet& admissible, const DetPolicy& policy,
                           const AttackSolution& attack, double lambda, double epsilon, std::string strategy);

/// Attacks `policy` with solve_attack and wraps the result.
DesignOutcome force_policy(const Mdp& mdp, const AdmissibleSet& admissible, const DetPolicy& policy, double lambda,
                           double epsilon, std::string strategy, const AttackOptions& options = {});

/// Visited states take admissible actions.
bool is_admissible(const Mdp& mdp, const AdmissibleSet& admissible, const DetPolicy& policy);

/// π*_adm: best score among admissible policies. Actions that can lead into a state
/// with no usable action are pruned first, then value iteration runs on the rest.
DetPolicy optimal_admissible(const Mdp& mdp, const AdmissibleSet& admissible);

struct QGreedyResult {
  double delta_q = 0.0;
  DetPolicy policy;
  /// Δ_t recorded in each outer round.
  std::vector<double> round_gaps;
  /// |S̃^{(t)}| at the start of each round.
  std::vector<int> remaining_states;
  /// S̃^{(t*)} for the selected round.
  std::vector<bool> selected_states;
};

/// Δ_Q = min over admissible π of max over visited s of Q*(s, π*(s)) - Q*(s, π(s)),
/// with a minimizing policy.
QGreedyResult qgreedy(const Mdp& mdp, const AdmissibleSet& admissible);

struct SearchTrace {
  /// Objective after initialization and after each accepted move.
  std::vector<double> objectives;
  std::vector<DetPolicy> policies;
  /// Allowed (s,a) count of the working admissible set after each step.
  std::vector<int> mask_sizes;
  int neighbors_evaluated = 0;
  int attacks_solved = 0;
};

/// Local search over admissible policies starting from π*_adm; a neighbor bans the
/// current action at one visited state and re-optimizes. States are tried in
/// decreasing Q*-gap order; the first improving neighbor is accepted.
DesignOutcome constrain_optimize(const Mdp& mdp, const AdmissibleSet& admissible, double lambda, double epsilon,
                                 SearchTrace* trace = nullptr, const AttackOptions& options = {});

/// Runs one of the named strategies end to end.
DesignOutcome design(const Mdp& mdp, const AdmissibleSet& admissible, Strategy strategy, double lambda, double epsilon,
                     const AttackOptions& options = {});

}  // namespace aptforge
