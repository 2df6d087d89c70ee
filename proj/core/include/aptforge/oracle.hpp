#pragma once

#include "aptforge/attack.hpp"
#include "aptforge/mdp.hpp"
#include "aptforge/policy_search.hpp"

#include <cstdint>
#include <vector>

namespace aptforge {

inline constexpr std::int64_t kOracleCap = 100000;
/// Slack subtracted from the strict threshold of opt^ε.
inline constexpr double kOptSetSlack = 1e-12;

/// Per-state action lists with exact duplicates removed: actions with identical
/// transition rows, rewards and (when given) admissibility keep only the lowest index.
std::vector<std::vector<int>> distinct_actions(const Mdp& mdp, const RewardTable& reward,
                                               const AdmissibleSet* admissible = nullptr);

/// opt^ε_det(R): every deterministic π with ρ^{π,R} > max ρ - ε.
std::vector<DetPolicy> opt_set(const Mdp& mdp, const RewardTable& reward, double epsilon, std::int64_t cap = kOracleCap);

/// Same over an explicit per-state action list.
std::vector<DetPolicy> opt_set(const Mdp& mdp, const RewardTable& reward, double epsilon,
                               const std::vector<std::vector<int>>& choices, std::int64_t cap = kOracleCap);

/// Admissible policies, one per distinct behavior on its own visited states.
std::vector<DetPolicy> admissible_policies(const Mdp& mdp, const AdmissibleSet& admissible,
                                           std::int64_t cap = kOracleCap);

/// Exhaustive design: the admissible policy minimizing cost - λρ, each forced with solve_attack.
DesignOutcome brute_design_p4(const Mdp& mdp, const AdmissibleSet& admissible, double lambda, double epsilon,
                              std::int64_t cap = kOracleCap, const AttackOptions& options = {});

/// min over admissible π of Δ_Q^π.
double brute_delta_q(const Mdp& mdp, const AdmissibleSet& admissible, std::int64_t cap = kOracleCap);

}  // namespace aptforge
