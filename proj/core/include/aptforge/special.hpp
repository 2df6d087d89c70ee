#pragma once

#include "aptforge/attack.hpp"
#include "aptforge/mdp.hpp"
#include "aptforge/policy_search.hpp"

#include <Eigen/Dense>

namespace aptforge {

inline constexpr double kTolSpecial = 1e-12;

/// Root x of Σ_{a≠t} [R(a) - x]₊ = x - R(t) + ε/μ.
struct SurplusSolution {
  double x = 0.0;
  /// Number of competitor rewards strictly above the root's segment, i.e. the
  /// sorted segment that contained the sign change.
  int breakpoint_index = 0;
};

SurplusSolution solve_surplus_x(const Eigen::VectorXd& rewards, int target_action, double eps_over_mu);

/// Left side minus right side of the surplus equation at x.
double surplus_residual(const Eigen::VectorXd& rewards, int target_action, double eps_over_mu, double x);

/// Optimal attack for a special MDP (action-independent transitions): on each visited
/// state, competitors above the threshold x_s are cut to x_s and the target action is
/// raised to x_s + ε/μ(s).
AttackSolution closed_form_attack(const Mdp& mdp, const DetPolicy& target, double epsilon);

/// Full design for a special MDP: force the myopically best admissible action at every
/// state with the closed-form attack.
DesignOutcome special_design(const Mdp& mdp, const AdmissibleSet& admissible, double epsilon, double lambda);

}  // namespace aptforge
