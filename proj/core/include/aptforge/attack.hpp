#pragma once

#include "aptforge/mdp.hpp"
#include "aptforge/qp.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace aptforge {

inline constexpr double kTolFeas = 1e-6;

struct FeasibilityReport {
  enum class Mode { enumerated_policies, bellman_closure };

  struct Offender {
    std::string constraint;  // "score_gap", "ge", "vqone", "vqzero"
    int state = -1;
    int action = -1;
    double violation = 0.0;
    std::optional<DetPolicy> policy;
  };

  Mode mode = Mode::bellman_closure;
  bool passed = false;
  double max_violation = 0.0;
  /// Enumeration mode: min over deviating policies of ρ^{π†,R̂} - ρ^{π,R̂}
  /// (+inf when no deviating policy exists).
  double min_score_gap = 0.0;
  std::int64_t policies_checked = 0;
  std::vector<Offender> worst;  // largest violations first, at most five
};

std::string to_string(FeasibilityReport::Mode mode);

/// Targeted poisoning problem: force π† on its visited states with score margin ε,
/// relaxed to per-state-action Q margins ε′.
struct AttackProblem {
  Mdp mdp;
  DetPolicy target;
  double epsilon = 0.0;
  RewardTable eps_prime;
  /// Set when ε′ came from the caller rather than epsilon_prime.
  bool custom_eps_prime = false;
};

/// Builds the problem with ε′ from epsilon_prime, or with a caller-provided
/// nonnegative ε′ table.
AttackProblem make_attack_problem(const Mdp& mdp, const DetPolicy& target, double epsilon,
                                  const std::optional<RewardTable>& eps_prime_override = std::nullopt);

struct SolverDiagnostics {
  std::string method;  // "admm", "admm+polish", "constructive", "closed_form"
  int iterations = 0;
  int rho_updates = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
};

struct AttackSolution {
  RewardTable r_hat;
  double cost = 0.0;
  ValueTables q_v;
  SolverDiagnostics diagnostics;
  FeasibilityReport feasibility;
};

struct VerifyOptions {
  std::int64_t enumeration_cap = 10000;
  double tol_feas = kTolFeas;
  /// ε′ used by the Bellman-closure check; defaults to epsilon_prime(mdp, target, ε).
  std::optional<RewardTable> eps_prime;
};

struct AttackOptions {
  qp::Settings qp;
  bool warm_start = true;
  double tol_feas = kTolFeas;
  VerifyOptions verify;
};

/// ε′_{π†}(s̃, ã) = ε / min_{π ∈ D(π†, s̃, ã)} μ^π(s̃) on visited states, zero elsewhere.
/// Each minimum is found exactly with minimize-mode value iteration.
RewardTable epsilon_prime(const Mdp& mdp, const DetPolicy& target, double epsilon);

/// Feasible (not optimal) attack: lift the target action by its optimality gap and
/// push competitors down by ε′ on visited states.
AttackSolution constructive_attack(const Mdp& mdp, const DetPolicy& target, double epsilon);

/// Minimum-L2 attack under the ε′-slack constraints, solved as a QP in (Q, V).
AttackSolution solve_attack(const AttackProblem& problem, const AttackOptions& options = {});

/// Post-hoc check that R̂ forces the target. Enumerates deterministic policies when
/// their count is within the cap; otherwise checks the relaxed constraint system
/// on (R̂, Q^{*,R̂}, V^{*,R̂}).
FeasibilityReport verify_forced(const Mdp& mdp, const RewardTable& r_hat, const DetPolicy& target, double epsilon,
                                const VerifyOptions& options = {});

/// Violations of the relaxed constraint system for an explicit (R, Q, V) triple.
/// Q must satisfy Q = R + γPV; that identity is checked too.
FeasibilityReport check_relaxed_constraints(const Mdp& mdp, const RewardTable& reward, const Eigen::MatrixXd& q,
                                            const Eigen::VectorXd& v, const DetPolicy& target,
                                            const RewardTable& eps_prime, double tol_feas = kTolFeas);

}  // namespace aptforge
