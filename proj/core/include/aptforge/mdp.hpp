#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace aptforge {

/// Reward table indexed [state][action].
using RewardTable = Eigen::MatrixXd;

/// Unvalidated MDP fields. `transitions[a](s, s')` is P(s, a, s').
struct MdpFields {
  int n_states = 0;
  int n_actions = 0;
  std::vector<Eigen::MatrixXd> transitions;
  RewardTable base_reward;
  double gamma = 0.0;
  Eigen::VectorXd initial_dist;
};

/// Tabular discounted MDP (S, A, P, R̄, γ, σ). Instances are always valid:
/// the only way to build one is through validate_mdp.
class Mdp {
 public:
  static constexpr double kStochasticTol = 1e-12;

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }
  double gamma() const noexcept { return gamma_; }
  const Eigen::VectorXd& initial_dist() const noexcept { return initial_dist_; }
  const RewardTable& base_reward() const noexcept { return base_reward_; }

  /// Row-stochastic matrix of action `a`: entry (s, s') is P(s, a, s').
  const Eigen::MatrixXd& transitions(int a) const { return transitions_[static_cast<size_t>(a)]; }
  double prob(int s, int a, int next) const { return transitions(a)(s, next); }

  /// Copy with a different base reward (shape-checked).
  Mdp with_reward(const RewardTable& reward) const;

  MdpFields fields() const;

 private:
  friend Mdp validate_mdp(MdpFields raw);
  Mdp() = default;

  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<Eigen::MatrixXd> transitions_;
  RewardTable base_reward_;
  double gamma_ = 0.0;
  Eigen::VectorXd initial_dist_;
};

/// Checks every invariant and throws ValidationError listing all violations.
Mdp validate_mdp(MdpFields raw);

/// Deterministic policy: one action index per state.
struct DetPolicy {
  std::vector<int> actions;

  DetPolicy() = default;
  explicit DetPolicy(std::vector<int> a) : actions(std::move(a)) {}
  static DetPolicy constant(int n_states, int action) {
    return DetPolicy(std::vector<int>(static_cast<size_t>(n_states), action));
  }

  int operator[](int s) const { return actions[static_cast<size_t>(s)]; }
  int& operator[](int s) { return actions[static_cast<size_t>(s)]; }
  int size() const noexcept { return static_cast<int>(actions.size()); }

  friend bool operator==(const DetPolicy&, const DetPolicy&) = default;
  friend auto operator<=>(const DetPolicy&, const DetPolicy&) = default;
};

/// Throws BadPolicy when the policy does not fit the MDP.
void check_policy(const Mdp& mdp, const DetPolicy& policy);

/// Per-state boolean action mask. Doubles as the admissible-action table
/// A^adm_s; states may have empty sets.
class ActionMask {
 public:
  ActionMask() = default;
  ActionMask(int n_states, int n_actions, bool value);

  static ActionMask all(int n_states, int n_actions) { return {n_states, n_actions, true}; }
  static ActionMask none(int n_states, int n_actions) { return {n_states, n_actions, false}; }

  int n_states() const noexcept { return n_states_; }
  int n_actions() const noexcept { return n_actions_; }

  bool operator()(int s, int a) const { return bits_[index(s, a)] != 0; }
  void set(int s, int a, bool value) { bits_[index(s, a)] = value ? 1 : 0; }
  int count(int s) const;
  bool empty(int s) const { return count(s) == 0; }

  /// True when the policy takes an allowed action at every listed state.
  bool permits(const DetPolicy& policy, std::span<const int> states) const;

  friend bool operator==(const ActionMask&, const ActionMask&) = default;

 private:
  size_t index(int s, int a) const { return static_cast<size_t>(s) * static_cast<size_t>(n_actions_) + static_cast<size_t>(a); }

  int n_states_ = 0;
  int n_actions_ = 0;
  std::vector<char> bits_;
};

using AdmissibleSet = ActionMask;

struct ValueTables {
  Eigen::MatrixXd q;  // [s][a]
  Eigen::VectorXd v;  // [s]
  double residual = 0.0;
};

struct OccupancyMeasure {
  static constexpr double kZeroTol = 1e-12;

  Eigen::VectorXd mu;
  std::vector<int> support;       // S_pos, ascending
  std::vector<bool> in_support;   // indexed by state
  double min_positive = 0.0;      // μ^π_min

  bool visited(int s) const { return in_support[static_cast<size_t>(s)]; }
};

enum class Optimize { maximize, minimize };

inline constexpr int kFreeAction = -1;

struct ValueIterationOptions {
  Optimize mode = Optimize::maximize;
  /// Permitted actions per state; every state must keep at least one.
  std::optional<ActionMask> allowed;
  /// Per-state fixed action or kFreeAction. Overrides `allowed`.
  std::vector<int> fixed;
  /// Sup-norm Bellman residual target; <= 0 selects 1e-10 (1 + max|R|).
  double tol = 0.0;
  /// <= 0 selects 10 ceil(log(tol) / log(gamma)).
  int max_iterations = 0;
};

/// Optimal (or pessimal) Q/V over the permitted action sets. Plain value
/// iteration to the residual target, then finished with exact evaluation of
/// the greedy policy so values are accurate to linear-solve round-off.
ValueTables value_iteration(const Mdp& mdp, const RewardTable& reward, const ValueIterationOptions& options = {});

/// Q^{π,R}, V^{π,R} by a direct solve of (I - γ P_π) V = R_π.
ValueTables policy_evaluation(const Mdp& mdp, const RewardTable& reward, const DetPolicy& policy);

/// Discounted state occupancy μ^π (sums to one) from the Bellman flow equation.
OccupancyMeasure occupancy(const Mdp& mdp, const DetPolicy& policy, double zero_tol = OccupancyMeasure::kZeroTol);

/// Score ρ^{π,R} = Σ_s μ^π(s) R(s, π(s)).
double score(const Mdp& mdp, const RewardTable& reward, const DetPolicy& policy);

/// Greedy policy w.r.t. a Q table; lowest action index among near-ties.
/// With a mask, only allowed actions are considered (states with none fall back to 0).
DetPolicy greedy_policy(const Eigen::MatrixXd& q, const ActionMask* allowed = nullptr);

/// π* for the given reward (all actions allowed).
DetPolicy optimal_policy(const Mdp& mdp, const RewardTable& reward);

struct ScoreDifference {
  double direct = 0.0;
  double identity = 0.0;
};

/// ρ^{π1} - ρ^{π2} computed directly and through Σ_s μ^{π1}(s) (Q^{π2}(s,π1(s)) - Q^{π2}(s,π2(s))).
ScoreDifference score_diff_check(const Mdp& mdp, const RewardTable& reward, const DetPolicy& pi1, const DetPolicy& pi2);

/// True when every action induces the same next-state distribution (within tol, inclusive).
bool is_special(const Mdp& mdp, double tol = 1e-12);

/// Q = R + γ P V for every state-action pair.
Eigen::MatrixXd bellman_q(const Mdp& mdp, const RewardTable& reward, const Eigen::VectorXd& v);

}  // namespace aptforge
