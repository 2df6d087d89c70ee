#include "aptforge/special.hpp"

#include "aptforge/error.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace aptforge {

double surplus_residual(const Eigen::VectorXd& rewards, int target_action, double eps_over_mu, double x) {
  double surplus = 0.0;
  for (Eigen::Index a = 0; a < rewards.size(); ++a) {
    if (a != target_action) surplus += std::max(rewards(a) - x, 0.0);
  }
  return surplus - x + rewards(target_action) - eps_over_mu;
}

SurplusSolution solve_surplus_x(const Eigen::VectorXd& rewards, int target_action, double eps_over_mu) {
  if (target_action < 0 || target_action >= rewards.size()) throw Error(ErrorCode::BadPolicy, "target action out of range");
  if (!(eps_over_mu >= 0.0)) throw Error(ErrorCode::BadSpec, "eps_over_mu must be nonnegative");

  std::vector<double> competitors;
  for (Eigen::Index a = 0; a < rewards.size(); ++a) {
    if (a != target_action) competitors.push_back(rewards(a));
  }
  std::sort(competitors.begin(), competitors.end(), std::greater<>());

  // On the segment where exactly j competitors exceed x the equation is linear:
  // Σ_{i<j} b_i - j x = x - R(t) + c.
  const double inf = std::numeric_limits<double>::infinity();
  const double base = rewards(target_action) - eps_over_mu;
  double prefix = 0.0;
  const int k = static_cast<int>(competitors.size());
  for (int j = 0; j <= k; ++j) {
    if (j > 0) prefix += competitors[static_cast<size_t>(j - 1)];
    const double x = (prefix + base) / (j + 1);
    const double upper = j == 0 ? inf : competitors[static_cast<size_t>(j - 1)];
    const double lower = j == k ? -inf : competitors[static_cast<size_t>(j)];
    if (x <= upper && x >= lower) return {x, j};
  }
  // Unreachable for finite input: the segments cover the real line.
  throw Error(ErrorCode::NoConvergence, "surplus equation has no root on any segment");
}

AttackSolution closed_form_attack(const Mdp& mdp, const DetPolicy& target, double epsilon) {
  check_policy(mdp, target);
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::BadSpec, "epsilon must be nonnegative");
  if (!is_special(mdp, kTolSpecial)) throw Error(ErrorCode::NotSpecial, "transitions depend on the action");

  const auto occ = occupancy(mdp, target);
  RewardTable r_hat = mdp.base_reward();
  for (int s : occ.support) {
    const int t = target[s];
    const double c = epsilon / occ.mu(s);
    const Eigen::VectorXd row = mdp.base_reward().row(s).transpose();
    const auto sol = solve_surplus_x(row, t, c);
    for (int a = 0; a < mdp.n_actions(); ++a) {
      if (a == t) {
        r_hat(s, a) = sol.x + c;
      } else if (row(a) >= sol.x) {
        r_hat(s, a) = sol.x;
      }
    }
  }

  AttackSolution out;
  out.cost = (r_hat - mdp.base_reward()).norm();
  out.q_v = value_iteration(mdp, r_hat);
  out.r_hat = std::move(r_hat);
  out.diagnostics.method = "closed_form";
  out.feasibility = verify_forced(mdp, out.r_hat, target, epsilon);
  return out;
}

DesignOutcome special_design(const Mdp& mdp, const AdmissibleSet& admissible, double epsilon, double lambda) {
  if (!is_special(mdp, kTolSpecial)) throw Error(ErrorCode::NotSpecial, "transitions depend on the action");
  if (admissible.n_states() != mdp.n_states() || admissible.n_actions() != mdp.n_actions()) {
    throw Error(ErrorCode::BadShape, "admissible mask does not match the MDP");
  }
  // μ does not depend on the policy here, so any policy gives the visited set.
  const auto occ = occupancy(mdp, DetPolicy::constant(mdp.n_states(), 0));
  DetPolicy policy = DetPolicy::constant(mdp.n_states(), 0);
  const RewardTable& r = mdp.base_reward();
  for (int s = 0; s < mdp.n_states(); ++s) {
    if (admissible.empty(s)) {
      if (occ.visited(s)) throw Error(ErrorCode::NoAdmissibleAction, "no admissible action at visited state " + std::to_string(s));
      continue;
    }
    int best = -1;
    for (int a = 0; a < mdp.n_actions(); ++a) {
      if (admissible(s, a) && (best < 0 || r(s, a) > r(s, best))) best = a;
    }
    policy[s] = best;
  }
  return make_outcome(mdp, admissible, policy, closed_form_attack(mdp, policy, epsilon), lambda, epsilon, "special");
}

}  // namespace aptforge
