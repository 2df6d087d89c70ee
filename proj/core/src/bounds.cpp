#include "aptforge/bounds.hpp"

#include "aptforge/enumeration.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace aptforge {

double delta_rho(const Mdp& mdp, const AdmissibleSet& admissible) {
  const RewardTable& r = mdp.base_reward();
  return score(mdp, r, optimal_policy(mdp, r)) - score(mdp, r, optimal_admissible(mdp, admissible));
}

double delta_q_pi(const Mdp& mdp, const DetPolicy& policy) {
  check_policy(mdp, policy);
  const auto star = value_iteration(mdp, mdp.base_reward());
  const auto occ = occupancy(mdp, policy);
  double gap = 0.0;
  for (int s : occ.support) gap = std::max(gap, star.q.row(s).maxCoeff() - star.q(s, policy[s]));
  return gap;
}

std::string to_string(MuMinMethod method) {
  return method == MuMinMethod::exact ? "exact" : "sampled-upper-estimate";
}

MuMin mu_min(const Mdp& mdp, const MuMinOptions& options) {
  MuMin out;
  out.value = 1.0;
  auto visit = [&](const DetPolicy& pi) {
    out.value = std::min(out.value, occupancy(mdp, pi).min_positive);
    ++out.policies_checked;
  };
  if (policy_count(mdp.n_states(), mdp.n_actions()) <= options.cap) {
    PolicyEnumeration::all(mdp, options.cap).for_each(visit);
    out.method = MuMinMethod::exact;
    return out;
  }
  out.method = MuMinMethod::sampled_upper_estimate;
  visit(optimal_policy(mdp, mdp.base_reward()));
  for (int a = 0; a < mdp.n_actions(); ++a) visit(DetPolicy::constant(mdp.n_states(), a));
  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<int> pick(0, mdp.n_actions() - 1);
  DetPolicy pi = DetPolicy::constant(mdp.n_states(), 0);
  for (int i = 0; i < options.samples; ++i) {
    for (int s = 0; s < mdp.n_states(); ++s) pi[s] = pick(rng);
    visit(pi);
  }
  return out;
}

BoundsReport phi_bounds(const Mdp& mdp, const AdmissibleSet& admissible, double lambda, double epsilon,
                        const DesignOutcome& outcome, const BoundsOptions& options) {
  BoundsReport rep;
  const double gamma = mdp.gamma();
  const double n_states = mdp.n_states();
  const double n_actions = mdp.n_actions();
  rep.delta_rho = delta_rho(mdp, admissible);
  rep.delta_q = qgreedy(mdp, admissible).delta_q;
  rep.mu_min = mu_min(mdp, options.mu_min);
  rep.advisory = rep.mu_min.method != MuMinMethod::exact;

  const double mu = rep.mu_min.value;
  rep.alpha_rho = lambda + (1.0 - gamma) / 2.0;
  rep.beta_rho = lambda + 1.0 / mu;
  rep.alpha_q = lambda * mu + (1.0 - gamma) / 2.0;
  rep.beta_q = lambda + std::sqrt(n_states);
  const double slack_term = epsilon * std::sqrt(n_states * n_actions) / mu;
  rep.thm3 = {rep.alpha_rho * rep.delta_rho, rep.beta_rho * rep.delta_rho + slack_term};
  rep.thm4 = {rep.alpha_q * rep.delta_q, rep.beta_q * rep.delta_q + slack_term};

  rep.outcome_delta_q = delta_q_pi(mdp, outcome.policy);
  rep.corollary_floor = (1.0 - gamma) / 2.0 * rep.outcome_delta_q;
  rep.corollary_holds = outcome.cost >= rep.corollary_floor - options.slack;

  if (options.optimal_phi) {
    rep.optimal_phi = options.optimal_phi;
    rep.optimal_phi_in_thm3 = rep.thm3.contains(*options.optimal_phi, options.slack);
    rep.optimal_phi_in_thm4 = rep.thm4.contains(*options.optimal_phi, options.slack);
  }
  return rep;
}

}  // namespace aptforge
