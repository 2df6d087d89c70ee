#pragma once

#include "aptforge/attack.hpp"
#include "aptforge/bounds.hpp"
#include "aptforge/mdp.hpp"
#include "aptforge/policy_search.hpp"

#include <optional>
#include <string>

namespace aptforge {

struct MdpDocument {
  Mdp mdp;
  std::optional<AdmissibleSet> admissible;
};

/// Reads the MDP JSON schema: n_states, n_actions, gamma, sigma, P[s][a][s'], R[s][a],
/// optional admissible[s][a]. Throws Parse, BadShape or ValidationError.
MdpDocument parse_mdp_json(const std::string& text);
MdpDocument load_mdp_json(const std::string& path);

std::string mdp_to_json(const Mdp& mdp, const AdmissibleSet* admissible = nullptr, int indent = 2);

std::string attack_to_json(const AttackSolution& attack, int indent = 2);
std::string outcome_to_json(const DesignOutcome& outcome, int indent = 2);
std::string bounds_to_json(const BoundsReport& report, int indent = 2);

/// {"outcome": ..., "bounds": ...} as written by the CLI.
std::string result_to_json(const DesignOutcome& outcome, const BoundsReport& bounds, int indent = 2);

}  // namespace aptforge
