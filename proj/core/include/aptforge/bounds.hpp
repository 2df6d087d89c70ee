#pragma once

#include "aptforge/mdp.hpp"
#include "aptforge/policy_search.hpp"

#include <cstdint>
#include <optional>
#include <string>

namespace aptforge {

/// ρ^{π*} - ρ^{π*_adm}.
double delta_rho(const Mdp& mdp, const AdmissibleSet& admissible);

/// max over visited s of Q*(s, π*(s)) - Q*(s, π(s)).
double delta_q_pi(const Mdp& mdp, const DetPolicy& policy);

enum class MuMinMethod { exact, sampled_upper_estimate };

std::string to_string(MuMinMethod method);

struct MuMin {
  double value = 0.0;
  MuMinMethod method = MuMinMethod::exact;
  std::int64_t policies_checked = 0;
};

struct MuMinOptions {
  std::int64_t cap = 10000;
  std::uint64_t seed = 0;
  int samples = 2000;
};

/// min over deterministic policies of μ^π_min. Exact when |A|^|S| ≤ cap, otherwise
/// the minimum over π*, constant policies and a seeded random sample.
MuMin mu_min(const Mdp& mdp, const MuMinOptions& options = {});

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool contains(double x, double slack) const { return x >= lower - slack && x <= upper + slack; }
};

struct BoundsReport {
  double delta_rho = 0.0;
  double delta_q = 0.0;
  MuMin mu_min;
  double alpha_rho = 0.0;
  double beta_rho = 0.0;
  double alpha_q = 0.0;
  double beta_q = 0.0;
  Interval thm3;
  Interval thm4;
  /// (1-γ)/2 · Δ_Q^π for the outcome's policy.
  double corollary_floor = 0.0;
  double outcome_delta_q = 0.0;
  bool corollary_holds = false;
  /// Set when an exhaustive optimum Φ was supplied.
  std::optional<double> optimal_phi;
  std::optional<bool> optimal_phi_in_thm3;
  std::optional<bool> optimal_phi_in_thm4;
  /// True when μ_min was sampled; the intervals are then advisory.
  bool advisory = false;
};

struct BoundsOptions {
  MuMinOptions mu_min;
  double slack = 1e-6;
  /// Φ of the exhaustive design optimum, when known.
  std::optional<double> optimal_phi;
};

BoundsReport phi_bounds(const Mdp& mdp, const AdmissibleSet& admissible, double lambda, double epsilon,
                        const DesignOutcome& outcome, const BoundsOptions& options = {});

}  // namespace aptforge
