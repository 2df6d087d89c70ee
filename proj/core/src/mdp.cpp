#include "aptforge/mdp.hpp"

#include "aptforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aptforge {

namespace {

std::string idx(int s, int a) { return "s=" + std::to_string(s) + ",a=" + std::to_string(a); }

double tie_tolerance(double value) { return 1e-10 * (1.0 + std::abs(value)); }

}  // namespace

Mdp validate_mdp(MdpFields raw) {
  using Issue = ValidationError::Issue;
  std::vector<Issue> issues;
  const int S = raw.n_states;
  const int A = raw.n_actions;

  if (S <= 0 || A <= 0) {
    issues.push_back({ErrorCode::BadShape, "n_states and n_actions must be positive"});
    throw ValidationError(std::move(issues));
  }
  if (static_cast<int>(raw.transitions.size()) != A) {
    issues.push_back({ErrorCode::BadShape, "expected " + std::to_string(A) + " transition matrices"});
  } else {
    for (int a = 0; a < A; ++a) {
      const auto& P = raw.transitions[static_cast<size_t>(a)];
      if (P.rows() != S || P.cols() != S) {
        issues.push_back({ErrorCode::BadShape, "transition matrix of action " + std::to_string(a) + " is not SxS"});
        continue;
      }
      for (int s = 0; s < S; ++s) {
        const double row_sum = P.row(s).sum();
        const bool negative = (P.row(s).array() < 0.0).any();
        const bool finite = P.row(s).allFinite();
        if (negative || !finite || std::abs(row_sum - 1.0) > Mdp::kStochasticTol) {
          issues.push_back({ErrorCode::NonStochasticRow, idx(s, a) + ",sum=" + std::to_string(row_sum)});
        }
      }
    }
  }
  if (raw.base_reward.rows() != S || raw.base_reward.cols() != A) {
    issues.push_back({ErrorCode::BadShape, "reward table is not SxA"});
  } else if (!raw.base_reward.allFinite()) {
    issues.push_back({ErrorCode::BadShape, "reward table has non-finite entries"});
  }
  if (!(raw.gamma >= 0.0 && raw.gamma < 1.0)) {
    issues.push_back({ErrorCode::BadDiscount, "gamma=" + std::to_string(raw.gamma)});
  }
  if (raw.initial_dist.size() != S) {
    issues.push_back({ErrorCode::BadInitialDist, "sigma has length " + std::to_string(raw.initial_dist.size())});
  } else if ((raw.initial_dist.array() < 0.0).any() || !raw.initial_dist.allFinite() ||
             std::abs(raw.initial_dist.sum() - 1.0) > Mdp::kStochasticTol) {
    issues.push_back({ErrorCode::BadInitialDist, "sigma sum=" + std::to_string(raw.initial_dist.sum())});
  }
  if (!issues.empty()) throw ValidationError(std::move(issues));

  Mdp mdp;
  mdp.n_states_ = S;
  mdp.n_actions_ = A;
  mdp.transitions_ = std::move(raw.transitions);
  mdp.base_reward_ = std::move(raw.base_reward);
  mdp.gamma_ = raw.gamma;
  mdp.initial_dist_ = std::move(raw.initial_dist);
  return mdp;
}

Mdp Mdp::with_reward(const RewardTable& reward) const {
  if (reward.rows() != n_states_ || reward.cols() != n_actions_) {
    throw Error(ErrorCode::BadShape, "reward table is not SxA");
  }
  Mdp copy = *this;
  copy.base_reward_ = reward;
  return copy;
}

MdpFields Mdp::fields() const {
  return MdpFields{n_states_, n_actions_, transitions_, base_reward_, gamma_, initial_dist_};
}

void check_policy(const Mdp& mdp, const DetPolicy& policy) {
  if (policy.size() != mdp.n_states()) {
    throw Error(ErrorCode::BadPolicy, "policy covers " + std::to_string(policy.size()) + " states, MDP has " +
                                          std::to_string(mdp.n_states()));
  }
  for (int s = 0; s < policy.size(); ++s) {
    if (policy[s] < 0 || policy[s] >= mdp.n_actions()) {
      throw Error(ErrorCode::BadPolicy, "action " + std::to_string(policy[s]) + " at state " + std::to_string(s));
    }
  }
}

ActionMask::ActionMask(int n_states, int n_actions, bool value)
    : n_states_(n_states),
      n_actions_(n_actions),
      bits_(static_cast<size_t>(n_states) * static_cast<size_t>(n_actions), value ? 1 : 0) {}

int ActionMask::count(int s) const {
  int c = 0;
  for (int a = 0; a < n_actions_; ++a) c += (*this)(s, a) ? 1 : 0;
  return c;
}

bool ActionMask::permits(const DetPolicy& policy, std::span<const int> states) const {
  return std::all_of(states.begin(), states.end(), [&](int s) { return (*this)(s, policy[s]); });
}

Eigen::MatrixXd bellman_q(const Mdp& mdp, const RewardTable& reward, const Eigen::VectorXd& v) {
  Eigen::MatrixXd q(mdp.n_states(), mdp.n_actions());
  for (int a = 0; a < mdp.n_actions(); ++a) {
    q.col(a) = reward.col(a) + mdp.gamma() * (mdp.transitions(a) * v);
  }
  return q;
}

namespace {

// Permitted action set of each state after applying mask and fixed overrides.
std::vector<std::vector<int>> permitted_actions(const Mdp& mdp, const ValueIterationOptions& options) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  if (options.allowed && (options.allowed->n_states() != S || options.allowed->n_actions() != A)) {
    throw Error(ErrorCode::BadShape, "action mask shape does not match MDP");
  }
  if (!options.fixed.empty() && static_cast<int>(options.fixed.size()) != S) {
    throw Error(ErrorCode::BadShape, "fixed partial policy must cover every state");
  }
  std::vector<std::vector<int>> permitted(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) {
    auto& acts = permitted[static_cast<size_t>(s)];
    const int fixed = options.fixed.empty() ? kFreeAction : options.fixed[static_cast<size_t>(s)];
    if (fixed != kFreeAction) {
      if (fixed < 0 || fixed >= A) throw Error(ErrorCode::BadPolicy, "fixed action out of range at state " + std::to_string(s));
      acts.push_back(fixed);
      continue;
    }
    for (int a = 0; a < A; ++a) {
      if (!options.allowed || (*options.allowed)(s, a)) acts.push_back(a);
    }
    if (acts.empty()) throw Error(ErrorCode::EmptyActionSet, "state " + std::to_string(s));
  }
  return permitted;
}

// Best permitted value per state and the lowest-index action attaining it.
void backup(const Eigen::MatrixXd& q, const std::vector<std::vector<int>>& permitted, Optimize mode, Eigen::VectorXd& v,
            std::vector<int>* argbest) {
  const int S = static_cast<int>(q.rows());
  for (int s = 0; s < S; ++s) {
    const auto& acts = permitted[static_cast<size_t>(s)];
    double best = q(s, acts.front());
    for (int a : acts) {
      best = mode == Optimize::maximize ? std::max(best, q(s, a)) : std::min(best, q(s, a));
    }
    v(s) = best;
    if (argbest) {
      for (int a : acts) {
        if (std::abs(q(s, a) - best) <= tie_tolerance(best)) {
          (*argbest)[static_cast<size_t>(s)] = a;
          break;
        }
      }
    }
  }
}

Eigen::VectorXd evaluate_exact(const Mdp& mdp, const RewardTable& reward, const std::vector<int>& policy) {
  const int S = mdp.n_states();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
  Eigen::VectorXd rhs(S);
  for (int s = 0; s < S; ++s) {
    const int a = policy[static_cast<size_t>(s)];
    system.row(s) -= mdp.gamma() * mdp.transitions(a).row(s);
    rhs(s) = reward(s, a);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularSystem, "I - gamma P_pi is numerically singular");
  return lu.solve(rhs);
}

}  // namespace

ValueTables value_iteration(const Mdp& mdp, const RewardTable& reward, const ValueIterationOptions& options) {
  const int S = mdp.n_states();
  if (reward.rows() != S || reward.cols() != mdp.n_actions()) throw Error(ErrorCode::BadShape, "reward table is not SxA");
  const auto permitted = permitted_actions(mdp, options);
  const double gamma = mdp.gamma();
  const double tol = options.tol > 0.0 ? options.tol : 1e-10 * (1.0 + reward.cwiseAbs().maxCoeff());
  int cap = options.max_iterations;
  if (cap <= 0) {
    cap = gamma > 0.0 ? 10 * static_cast<int>(std::ceil(std::log(tol) / std::log(gamma))) : 10;
    cap = std::max(cap, 10);
  }

  Eigen::VectorXd v = Eigen::VectorXd::Zero(S);
  Eigen::VectorXd next(S);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 0; it < cap; ++it) {
    backup(bellman_q(mdp, reward, v), permitted, options.mode, next, nullptr);
    residual = (next - v).lpNorm<Eigen::Infinity>();
    v.swap(next);
    if (residual <= tol) break;
  }
  if (!(residual <= tol)) {
    throw Error(ErrorCode::NoConvergence, "value iteration residual " + std::to_string(residual) + " above " +
                                              std::to_string(tol));
  }

  // Policy-iteration finish: evaluate the greedy policy exactly until it is stable.
  std::vector<int> greedy(static_cast<size_t>(S), 0);
  backup(bellman_q(mdp, reward, v), permitted, options.mode, next, &greedy);
  for (int round = 0; round < 50; ++round) {
    Eigen::VectorXd exact = evaluate_exact(mdp, reward, greedy);
    std::vector<int> improved(static_cast<size_t>(S), 0);
    Eigen::VectorXd backed(S);
    backup(bellman_q(mdp, reward, exact), permitted, options.mode, backed, &improved);
    const double exact_residual = (backed - exact).lpNorm<Eigen::Infinity>();
    if (exact_residual > residual) break;
    v = exact;
    residual = exact_residual;
    if (improved == greedy) break;
    greedy = std::move(improved);
  }

  ValueTables out;
  out.q = bellman_q(mdp, reward, v);
  out.v = v;
  out.residual = residual;
  return out;
}

ValueTables policy_evaluation(const Mdp& mdp, const RewardTable& reward, const DetPolicy& policy) {
  check_policy(mdp, policy);
  if (reward.rows() != mdp.n_states() || reward.cols() != mdp.n_actions()) {
    throw Error(ErrorCode::BadShape, "reward table is not SxA");
  }
  ValueTables out;
  out.v = evaluate_exact(mdp, reward, policy.actions);
  out.q = bellman_q(mdp, reward, out.v);
  Eigen::VectorXd on_policy(mdp.n_states());
  for (int s = 0; s < mdp.n_states(); ++s) on_policy(s) = out.q(s, policy[s]);
  out.residual = (on_policy - out.v).lpNorm<Eigen::Infinity>();
  return out;
}

OccupancyMeasure occupancy(const Mdp& mdp, const DetPolicy& policy, double zero_tol) {
  check_policy(mdp, policy);
  const int S = mdp.n_states();
  // μ = (1-γ) σ + γ P_πᵀ μ
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(S, S);
  for (int s = 0; s < S; ++s) {
    system.col(s) -= mdp.gamma() * mdp.transitions(policy[s]).row(s).transpose();
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
  if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::SingularSystem, "Bellman flow system is numerically singular");
  OccupancyMeasure out;
  out.mu = lu.solve((1.0 - mdp.gamma()) * mdp.initial_dist());
  out.mu = out.mu.cwiseMax(0.0);
  out.in_support.assign(static_cast<size_t>(S), false);
  out.min_positive = std::numeric_limits<double>::infinity();
  for (int s = 0; s < S; ++s) {
    if (out.mu(s) > zero_tol) {
      out.support.push_back(s);
      out.in_support[static_cast<size_t>(s)] = true;
      out.min_positive = std::min(out.min_positive, out.mu(s));
    }
  }
  return out;
}

double score(const Mdp& mdp, const RewardTable& reward, const DetPolicy& policy) {
  const auto occ = occupancy(mdp, policy);
  double total = 0.0;
  for (int s = 0; s < mdp.n_states(); ++s) total += occ.mu(s) * reward(s, policy[s]);
  return total;
}

DetPolicy greedy_policy(const Eigen::MatrixXd& q, const ActionMask* allowed) {
  const int S = static_cast<int>(q.rows());
  const int A = static_cast<int>(q.cols());
  DetPolicy policy = DetPolicy::constant(S, 0);
  for (int s = 0; s < S; ++s) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < A; ++a) {
      if (!allowed || (*allowed)(s, a)) best = std::max(best, q(s, a));
    }
    if (!std::isfinite(best)) continue;
    for (int a = 0; a < A; ++a) {
      if ((!allowed || (*allowed)(s, a)) && q(s, a) >= best - tie_tolerance(best)) {
        policy[s] = a;
        break;
      }
    }
  }
  return policy;
}

DetPolicy optimal_policy(const Mdp& mdp, const RewardTable& reward) {
  return greedy_policy(value_iteration(mdp, reward).q);
}

ScoreDifference score_diff_check(const Mdp& mdp, const RewardTable& reward, const DetPolicy& pi1, const DetPolicy& pi2) {
  ScoreDifference out;
  out.direct = score(mdp, reward, pi1) - score(mdp, reward, pi2);
  const auto occ1 = occupancy(mdp, pi1);
  const auto vt2 = policy_evaluation(mdp, reward, pi2);
  for (int s = 0; s < mdp.n_states(); ++s) {
    out.identity += occ1.mu(s) * (vt2.q(s, pi1[s]) - vt2.q(s, pi2[s]));
  }
  return out;
}

bool is_special(const Mdp& mdp, double tol) {
  for (int a = 1; a < mdp.n_actions(); ++a) {
    for (int b = 0; b < a; ++b) {
      if ((mdp.transitions(a) - mdp.transitions(b)).cwiseAbs().maxCoeff() > tol) return false;
    }
  }
  return true;
}

}  // namespace aptforge
