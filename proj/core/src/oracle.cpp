#include "aptforge/oracle.hpp"

#include "aptforge/enumeration.hpp"
#include "aptforge/error.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace aptforge {

std::vector<std::vector<int>> distinct_actions(const Mdp& mdp, const RewardTable& reward,
                                               const AdmissibleSet* admissible) {
  std::vector<std::vector<int>> choices(static_cast<size_t>(mdp.n_states()));
  for (int s = 0; s < mdp.n_states(); ++s) {
    auto& list = choices[static_cast<size_t>(s)];
    for (int a = 0; a < mdp.n_actions(); ++a) {
      const bool duplicate = std::any_of(list.begin(), list.end(), [&](int b) {
        return reward(s, a) == reward(s, b) && mdp.transitions(a).row(s) == mdp.transitions(b).row(s) &&
               (admissible == nullptr || (*admissible)(s, a) == (*admissible)(s, b));
      });
      if (!duplicate) list.push_back(a);
    }
  }
  return choices;
}

std::vector<DetPolicy> opt_set(const Mdp& mdp, const RewardTable& reward, double epsilon,
                               const std::vector<std::vector<int>>& choices, std::int64_t cap) {
  PolicyEnumeration policies(choices, cap);
  std::vector<std::pair<DetPolicy, double>> scored;
  scored.reserve(static_cast<size_t>(policies.count()));
  double best = -std::numeric_limits<double>::infinity();
  policies.for_each([&](const DetPolicy& pi) {
    const double rho = score(mdp, reward, pi);
    best = std::max(best, rho);
    scored.emplace_back(pi, rho);
  });
  std::vector<DetPolicy> out;
  for (auto& [pi, rho] : scored) {
    if (rho > best - epsilon - kOptSetSlack) out.push_back(std::move(pi));
  }
  return out;
}

std::vector<DetPolicy> opt_set(const Mdp& mdp, const RewardTable& reward, double epsilon, std::int64_t cap) {
  std::vector<int> every(static_cast<size_t>(mdp.n_actions()));
  for (int a = 0; a < mdp.n_actions(); ++a) every[static_cast<size_t>(a)] = a;
  return opt_set(mdp, reward, epsilon, std::vector<std::vector<int>>(static_cast<size_t>(mdp.n_states()), every), cap);
}

std::vector<DetPolicy> admissible_policies(const Mdp& mdp, const AdmissibleSet& admissible, std::int64_t cap) {
  std::vector<std::vector<int>> choices(static_cast<size_t>(mdp.n_states()));
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      if (admissible(s, a) || admissible.empty(s)) choices[static_cast<size_t>(s)].push_back(a);
    }
  }
  std::set<std::vector<int>> seen;
  std::vector<DetPolicy> out;
  PolicyEnumeration(choices, cap).for_each([&](const DetPolicy& pi) {
    const auto occ = occupancy(mdp, pi);
    if (!admissible.permits(pi, occ.support)) return;
    std::vector<int> key(static_cast<size_t>(mdp.n_states()), -1);
    for (int s : occ.support) key[static_cast<size_t>(s)] = pi[s];
    if (seen.insert(std::move(key)).second) out.push_back(pi);
  });
  if (out.empty()) throw Error(ErrorCode::NoAdmissiblePolicy, "no deterministic policy stays admissible");
  return out;
}

DesignOutcome brute_design_p4(const Mdp& mdp, const AdmissibleSet& admissible, double lambda, double epsilon,
                              std::int64_t cap, const AttackOptions& options) {
  std::optional<DesignOutcome> best;
  for (const auto& pi : admissible_policies(mdp, admissible, cap)) {
    auto outcome = force_policy(mdp, admissible, pi, lambda, epsilon, "brute-p4", options);
    if (!best || outcome.objective < best->objective) best = std::move(outcome);
  }
  return *best;
}

double brute_delta_q(const Mdp& mdp, const AdmissibleSet& admissible, std::int64_t cap) {
  const auto star = value_iteration(mdp, mdp.base_reward());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pi : admissible_policies(mdp, admissible, cap)) {
    const auto occ = occupancy(mdp, pi);
    double gap = 0.0;
    for (int s : occ.support) gap = std::max(gap, star.q.row(s).maxCoeff() - star.q(s, pi[s]));
    best = std::min(best, gap);
  }
  return best;
}

}  // namespace aptforge
