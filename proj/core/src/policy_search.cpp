#include "aptforge/policy_search.hpp"

#include "aptforge/error.hpp"
#include "aptforge/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

namespace aptforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-12;
constexpr double kImproveTol = 1e-9;

void check_mask(const Mdp& mdp, const AdmissibleSet& admissible) {
  if (admissible.n_states() != mdp.n_states() || admissible.n_actions() != mdp.n_actions()) {
    throw Error(ErrorCode::BadShape, "admissible mask is " + std::to_string(admissible.n_states()) + "x" +
                                         std::to_string(admissible.n_actions()) + ", MDP is " +
                                         std::to_string(mdp.n_states()) + "x" + std::to_string(mdp.n_actions()));
  }
}

int mask_size(const AdmissibleSet& mask) {
  int total = 0;
  for (int s = 0; s < mask.n_states(); ++s) total += mask.count(s);
  return total;
}

// Drops actions that can reach a state left without actions, to a fixed point.
// Returns the dead states.
std::vector<bool> prune_dead(const Mdp& mdp, AdmissibleSet& mask) {
  const int S = mdp.n_states();
  std::vector<bool> dead(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) dead[static_cast<size_t>(s)] = mask.empty(s);
  bool changed = true;
  while (changed) {
    changed = false;
    for (int s = 0; s < S; ++s) {
      if (dead[static_cast<size_t>(s)]) continue;
      for (int a = 0; a < mdp.n_actions(); ++a) {
        if (!mask(s, a)) continue;
        for (int next = 0; next < S; ++next) {
          if (dead[static_cast<size_t>(next)] && mdp.prob(s, a, next) > 0.0) {
            mask.set(s, a, false);
            break;
          }
        }
      }
      if (mask.empty(s)) {
        dead[static_cast<size_t>(s)] = true;
        changed = true;
      }
    }
  }
  return dead;
}

std::vector<double> optimal_gaps_row(const Eigen::MatrixXd& q, int s) {
  const double best = q.row(s).maxCoeff();
  std::vector<double> gaps(static_cast<size_t>(q.cols()));
  for (Eigen::Index a = 0; a < q.cols(); ++a) gaps[static_cast<size_t>(a)] = std::max(0.0, best - q(s, a));
  return gaps;
}

// Policy behavior on its own visited states; other entries are -1.
std::vector<int> behavior_key(const Mdp& mdp, const DetPolicy& policy) {
  const auto occ = occupancy(mdp, policy);
  std::vector<int> key(static_cast<size_t>(mdp.n_states()), -1);
  for (int s : occ.support) key[static_cast<size_t>(s)] = policy[s];
  return key;
}

}  // namespace

std::string to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::opt: return "opt";
    case Strategy::opt_adm: return "opt-adm";
    case Strategy::qgreedy: return "qgreedy";
    case Strategy::constrain_optimize: return "constrain-optimize";
    case Strategy::special: return "special";
  }
  return "unknown";
}

Strategy parse_strategy(const std::string& name) {
  for (auto s : {Strategy::opt, Strategy::opt_adm, Strategy::qgreedy, Strategy::constrain_optimize, Strategy::special}) {
    if (to_string(s) == name) return s;
  }
  throw Error(ErrorCode::BadSpec, "unknown strategy '" + name + "'");
}

bool is_admissible(const Mdp& mdp, const AdmissibleSet& admissible, const DetPolicy& policy) {
  check_mask(mdp, admissible);
  const auto occ = occupancy(mdp, policy);
  return admissible.permits(policy, occ.support);
}

DesignOutcome make_outcome(const Mdp& mdp, const AdmissibleSet& admissible, const DetPolicy& policy,
                           const AttackSolution& attack, double lambda, double epsilon, std::string strategy) {
  DesignOutcome out;
  out.strategy = std::move(strategy);
  out.policy = policy;
  out.r_hat = attack.r_hat;
  out.cost = attack.cost;
  out.score = score(mdp, mdp.base_reward(), policy);
  out.optimal_score = score(mdp, mdp.base_reward(), optimal_policy(mdp, mdp.base_reward()));
  out.lambda = lambda;
  out.epsilon = epsilon;
  out.objective = out.cost - lambda * out.score;
  out.phi = out.cost + lambda * (out.optimal_score - out.score);
  out.admissible = is_admissible(mdp, admissible, policy);
  out.diagnostics = attack.diagnostics;
  out.feasibility = attack.feasibility;
  return out;
}

DesignOutcome force_policy(const Mdp& mdp, const AdmissibleSet& admissible, const DetPolicy& policy, double lambda,
                           double epsilon, std::string strategy, const AttackOptions& options) {
  const auto attack = solve_attack(make_attack_problem(mdp, policy, epsilon), options);
  return make_outcome(mdp, admissible, policy, attack, lambda, epsilon, std::move(strategy));
}

DetPolicy optimal_admissible(const Mdp& mdp, const AdmissibleSet& admissible) {
  check_mask(mdp, admissible);
  AdmissibleSet safe = admissible;
  const auto dead = prune_dead(mdp, safe);
  for (int s = 0; s < mdp.n_states(); ++s) {
    if (dead[static_cast<size_t>(s)] && mdp.initial_dist()(s) > 0.0) {
      throw Error(ErrorCode::NoAdmissiblePolicy, "initial state " + std::to_string(s) + " cannot avoid inadmissible actions");
    }
  }
  // Dead states are unreachable from σ under any safe choice; let them act freely.
  AdmissibleSet allowed = safe;
  for (int s = 0; s < mdp.n_states(); ++s) {
    if (dead[static_cast<size_t>(s)]) {
      for (int a = 0; a < mdp.n_actions(); ++a) allowed.set(s, a, true);
    }
  }
  ValueIterationOptions opts;
  opts.allowed = allowed;
  const auto vt = value_iteration(mdp, mdp.base_reward(), opts);
  return greedy_policy(vt.q, &allowed);
}

QGreedyResult qgreedy(const Mdp& mdp, const AdmissibleSet& admissible) {
  check_mask(mdp, admissible);
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  const auto star = value_iteration(mdp, mdp.base_reward());
  const DetPolicy pi_star = greedy_policy(star.q);
  std::vector<std::vector<double>> gap(static_cast<size_t>(S));
  for (int s = 0; s < S; ++s) gap[static_cast<size_t>(s)] = optimal_gaps_row(star.q, s);

  AdmissibleSet adm = admissible;
  std::vector<bool> remaining(static_cast<size_t>(S), true);
  std::vector<int> sigma_support;
  for (int s = 0; s < S; ++s) {
    if (mdp.initial_dist()(s) > 0.0) sigma_support.push_back(s);
  }

  QGreedyResult result;
  std::vector<DetPolicy> round_policies;
  std::vector<std::vector<bool>> round_states;
  auto support_inside = [&] {
    return std::all_of(sigma_support.begin(), sigma_support.end(), [&](int s) { return remaining[static_cast<size_t>(s)]; });
  };

  while (support_inside()) {
    int count = static_cast<int>(std::count(remaining.begin(), remaining.end(), true));
    result.remaining_states.push_back(count);

    int chosen = -1;
    double chosen_delta = -kInf;
    DetPolicy pi = pi_star;
    for (int s = 0; s < S; ++s) {
      if (!remaining[static_cast<size_t>(s)]) continue;
      double delta = kInf;
      int arg = -1;
      for (int a = 0; a < A; ++a) {
        if (!adm(s, a)) continue;
        const double g = gap[static_cast<size_t>(s)][static_cast<size_t>(a)];
        if (arg < 0 || g < delta - kTieTol) {
          delta = g;
          arg = a;
        }
      }
      if (arg >= 0) pi[s] = arg;
      if (chosen < 0 || delta > chosen_delta) {
        chosen = s;
        chosen_delta = delta;
      }
    }
    // Removed states keep their lowest originally admissible action.
    for (int s = 0; s < S; ++s) {
      if (remaining[static_cast<size_t>(s)]) continue;
      for (int a = 0; a < A; ++a) {
        if (admissible(s, a)) {
          pi[s] = a;
          break;
        }
      }
    }
    result.round_gaps.push_back(chosen_delta);
    round_policies.push_back(pi);
    round_states.push_back(remaining);

    std::vector<int> removing{chosen};
    while (!removing.empty()) {
      for (int s : removing) remaining[static_cast<size_t>(s)] = false;
      for (int s = 0; s < S; ++s) {
        if (!remaining[static_cast<size_t>(s)]) continue;
        for (int a = 0; a < A; ++a) {
          if (!adm(s, a)) continue;
          for (int next = 0; next < S; ++next) {
            if (!remaining[static_cast<size_t>(next)] && mdp.prob(s, a, next) > 0.0) {
              adm.set(s, a, false);
              break;
            }
          }
        }
      }
      removing.clear();
      for (int s = 0; s < S; ++s) {
        if (remaining[static_cast<size_t>(s)] && adm.empty(s)) removing.push_back(s);
      }
    }
  }

  if (result.round_gaps.empty()) throw Error(ErrorCode::NoAdmissiblePolicy, "initial distribution has empty support");
  const auto best = std::min_element(result.round_gaps.begin(), result.round_gaps.end());
  if (std::isinf(*best)) throw Error(ErrorCode::NoAdmissiblePolicy, "every round left a reachable state without actions");
  const auto t = static_cast<size_t>(best - result.round_gaps.begin());
  result.delta_q = *best;
  result.policy = round_policies[t];
  result.selected_states = round_states[t];
  return result;
}

DesignOutcome constrain_optimize(const Mdp& mdp, const AdmissibleSet& admissible, double lambda, double epsilon,
                                 SearchTrace* trace, const AttackOptions& options) {
  check_mask(mdp, admissible);
  const auto star = value_iteration(mdp, mdp.base_reward());
  const RewardTable& r = mdp.base_reward();

  std::map<std::vector<int>, AttackSolution> memo;
  auto attack = [&](const DetPolicy& policy) -> const AttackSolution& {
    auto key = behavior_key(mdp, policy);
    auto it = memo.find(key);
    if (it == memo.end()) {
      it = memo.emplace(std::move(key), solve_attack(make_attack_problem(mdp, policy, epsilon), options)).first;
      if (trace) ++trace->attacks_solved;
    }
    return it->second;
  };

  AdmissibleSet current_mask = admissible;
  DetPolicy current = optimal_admissible(mdp, current_mask);
  double current_objective = attack(current).cost - lambda * score(mdp, r, current);
  if (trace) {
    trace->objectives.push_back(current_objective);
    trace->policies.push_back(current);
    trace->mask_sizes.push_back(mask_size(current_mask));
  }

  bool improved = true;
  while (improved) {
    improved = false;
    const auto occ = occupancy(mdp, current);
    std::vector<int> order = occ.support;
    std::vector<double> priority(static_cast<size_t>(mdp.n_states()), 0.0);
    for (int s : order) priority[static_cast<size_t>(s)] = star.q.row(s).maxCoeff() - star.q(s, current[s]);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return priority[static_cast<size_t>(a)] > priority[static_cast<size_t>(b)]; });

    for (int s : order) {
      AdmissibleSet mask = current_mask;
      mask.set(s, current[s], false);
      if (mask.empty(s)) continue;
      DetPolicy neighbor;
      try {
        neighbor = optimal_admissible(mdp, mask);
      } catch (const Error& e) {
        if (e.code() == ErrorCode::NoAdmissiblePolicy) continue;
        throw;
      }
      if (trace) ++trace->neighbors_evaluated;
      const double objective = attack(neighbor).cost - lambda * score(mdp, r, neighbor);
      if (objective < current_objective - kImproveTol) {
        current = neighbor;
        current_mask = mask;
        current_objective = objective;
        improved = true;
        if (trace) {
          trace->objectives.push_back(current_objective);
          trace->policies.push_back(current);
          trace->mask_sizes.push_back(mask_size(current_mask));
        }
        break;
      }
    }
  }
  return make_outcome(mdp, admissible, current, attack(current), lambda, epsilon, "constrain-optimize");
}

DesignOutcome design(const Mdp& mdp, const AdmissibleSet& admissible, Strategy strategy, double lambda, double epsilon,
                     const AttackOptions& options) {
  check_mask(mdp, admissible);
  switch (strategy) {
    case Strategy::opt:
      return force_policy(mdp, admissible, optimal_policy(mdp, mdp.base_reward()), lambda, epsilon, "opt", options);
    case Strategy::opt_adm:
      return force_policy(mdp, admissible, optimal_admissible(mdp, admissible), lambda, epsilon, "opt-adm", options);
    case Strategy::qgreedy:
      return force_policy(mdp, admissible, qgreedy(mdp, admissible).policy, lambda, epsilon, "qgreedy", options);
    case Strategy::constrain_optimize:
      return constrain_optimize(mdp, admissible, lambda, epsilon, nullptr, options);
    case Strategy::special:
      return special_design(mdp, admissible, epsilon, lambda);
  }
  throw Error(ErrorCode::BadSpec, "unknown strategy");
}

}  // namespace aptforge
