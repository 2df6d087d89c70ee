#include "aptforge/attack.hpp"

#include "aptforge/enumeration.hpp"
#include "aptforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace aptforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr size_t kMaxOffenders = 5;

void record(FeasibilityReport& report, FeasibilityReport::Offender offender) {
  report.max_violation = std::max(report.max_violation, offender.violation);
  if (offender.violation <= 0.0) return;
  auto& worst = report.worst;
  const auto pos = std::find_if(worst.begin(), worst.end(),
                                [&](const auto& o) { return o.violation < offender.violation; });
  worst.insert(pos, std::move(offender));
  if (worst.size() > kMaxOffenders) worst.pop_back();
}

double reward_distance(const RewardTable& a, const RewardTable& b) { return (a - b).norm(); }

AttackSolution finish(const Mdp& mdp, RewardTable r_hat, ValueTables q_v, SolverDiagnostics diagnostics) {
  AttackSolution out;
  out.cost = reward_distance(r_hat, mdp.base_reward());
  out.r_hat = std::move(r_hat);
  out.q_v = std::move(q_v);
  out.diagnostics = std::move(diagnostics);
  return out;
}

struct QpLayout {
  int S = 0;
  int A = 0;
  Eigen::Index q(int s, int a) const { return static_cast<Eigen::Index>(s) * A + a; }
  Eigen::Index v(int s) const { return static_cast<Eigen::Index>(S) * A + s; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(S) * A + S; }
};

// Rows of the constraint matrix with their bounds.
struct ConstraintRows {
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> lower;
  std::vector<double> upper;

  void add(Eigen::RowVectorXd row, double lo, double hi) {
    rows.push_back(std::move(row));
    lower.push_back(lo);
    upper.push_back(hi);
  }
};

qp::Problem build_qp(const AttackProblem& problem, const OccupancyMeasure& occ) {
  const Mdp& mdp = problem.mdp;
  const QpLayout L{mdp.n_states(), mdp.n_actions()};
  const Eigen::Index n = L.size();
  const Eigen::Index sa = static_cast<Eigen::Index>(L.S) * L.A;

  // R = M x with x = (Q, V):  R(s,a) = Q(s,a) - γ Σ P(s,a,s') V(s')
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(sa, n);
  Eigen::VectorXd r_bar(sa);
  for (int s = 0; s < L.S; ++s) {
    for (int a = 0; a < L.A; ++a) {
      const Eigen::Index row = L.q(s, a);
      M(row, L.q(s, a)) = 1.0;
      M.block(row, L.v(0), 1, L.S) = -mdp.gamma() * mdp.transitions(a).row(s);
      r_bar(row) = mdp.base_reward()(s, a);
    }
  }

  ConstraintRows c;
  for (int s = 0; s < L.S; ++s) {
    const int target = problem.target[s];
    if (occ.visited(s)) {
      for (int a = 0; a < L.A; ++a) {
        if (a == target) continue;
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        row(L.q(s, target)) = 1.0;
        row(L.q(s, a)) = -1.0;
        c.add(std::move(row), problem.eps_prime(s, a), kInf);
      }
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      row(L.v(s)) = 1.0;
      row(L.q(s, target)) = -1.0;
      c.add(std::move(row), 0.0, 0.0);
    } else {
      for (int a = 0; a < L.A; ++a) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        row(L.v(s)) = 1.0;
        row(L.q(s, a)) = -1.0;
        c.add(std::move(row), 0.0, kInf);
      }
    }
  }

  qp::Problem qp;
  qp.P = M.transpose() * M;
  qp.q = -M.transpose() * r_bar;
  const auto m = static_cast<Eigen::Index>(c.rows.size());
  qp.A.resize(m, n);
  qp.lower.resize(m);
  qp.upper.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    qp.A.row(i) = c.rows[static_cast<size_t>(i)];
    qp.lower(i) = c.lower[static_cast<size_t>(i)];
    qp.upper(i) = c.upper[static_cast<size_t>(i)];
  }
  return qp;
}

// Restores exact feasibility of (Q, V) after the iterative solve.
void project_feasible(const AttackProblem& problem, const OccupancyMeasure& occ, Eigen::MatrixXd& q, Eigen::VectorXd& v) {
  const int S = problem.mdp.n_states();
  const int A = problem.mdp.n_actions();
  for (int s = 0; s < S; ++s) {
    if (occ.visited(s)) {
      const int target = problem.target[s];
      double needed = q(s, target);
      for (int a = 0; a < A; ++a) {
        if (a != target) needed = std::max(needed, q(s, a) + problem.eps_prime(s, a));
      }
      q(s, target) = needed;
      v(s) = needed;
    } else {
      v(s) = std::max(v(s), q.row(s).maxCoeff());
    }
  }
}

}  // namespace

std::string to_string(FeasibilityReport::Mode mode) {
  return mode == FeasibilityReport::Mode::enumerated_policies ? "enumerated-policies" : "bellman-closure";
}

RewardTable epsilon_prime(const Mdp& mdp, const DetPolicy& target, double epsilon) {
  check_policy(mdp, target);
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::BadSpec, "epsilon must be nonnegative");
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  RewardTable out = RewardTable::Zero(S, A);
  if (epsilon == 0.0) return out;

  const auto occ = occupancy(mdp, target);
  for (int s_tilde : occ.support) {
    RewardTable indicator = RewardTable::Zero(S, A);
    indicator.row(s_tilde).setOnes();
    for (int a_tilde = 0; a_tilde < A; ++a_tilde) {
      if (a_tilde == target[s_tilde]) continue;
      ValueIterationOptions opts;
      opts.mode = Optimize::minimize;
      opts.fixed.assign(static_cast<size_t>(S), kFreeAction);
      for (int s : occ.support) opts.fixed[static_cast<size_t>(s)] = target[s];
      opts.fixed[static_cast<size_t>(s_tilde)] = a_tilde;
      const auto vt = value_iteration(mdp, indicator, opts);
      const double min_mu = (1.0 - mdp.gamma()) * mdp.initial_dist().dot(vt.v);
      if (!(min_mu > OccupancyMeasure::kZeroTol)) {
        throw Error(ErrorCode::DegenerateDenominator, "min occupancy " + std::to_string(min_mu) + " at state " +
                                                          std::to_string(s_tilde) + ", action " + std::to_string(a_tilde));
      }
      out(s_tilde, a_tilde) = epsilon / min_mu;
    }
  }
  return out;
}

AttackProblem make_attack_problem(const Mdp& mdp, const DetPolicy& target, double epsilon,
                                  const std::optional<RewardTable>& eps_prime_override) {
  check_policy(mdp, target);
  if (!(epsilon >= 0.0)) throw Error(ErrorCode::BadSpec, "epsilon must be nonnegative");
  AttackProblem problem{mdp, target, epsilon, {}, eps_prime_override.has_value()};
  if (eps_prime_override) {
    const auto& ep = *eps_prime_override;
    if (ep.rows() != mdp.n_states() || ep.cols() != mdp.n_actions()) throw Error(ErrorCode::BadShape, "eps_prime is not SxA");
    if ((ep.array() < 0.0).any()) throw Error(ErrorCode::BadSpec, "eps_prime must be nonnegative");
    problem.eps_prime = ep;
    // Entries outside the constrained pairs carry no meaning; keep the invariant.
    const auto occ = occupancy(mdp, target);
    for (int s = 0; s < mdp.n_states(); ++s) {
      if (!occ.visited(s)) problem.eps_prime.row(s).setZero();
      problem.eps_prime(s, target[s]) = 0.0;
    }
  } else {
    problem.eps_prime = epsilon_prime(mdp, target, epsilon);
  }
  return problem;
}

namespace {

AttackSolution constructive_with(const Mdp& mdp, const DetPolicy& target, const RewardTable& eps_prime,
                                 const OccupancyMeasure& occ, const ValueTables& optimal) {
  RewardTable r = mdp.base_reward();
  for (int s : occ.support) {
    const int t = target[s];
    for (int a = 0; a < mdp.n_actions(); ++a) {
      if (a == t) {
        r(s, a) += optimal.v(s) - optimal.q(s, t);
      } else {
        r(s, a) -= eps_prime(s, a);
      }
    }
  }
  ValueTables q_v;
  q_v.v = optimal.v;
  q_v.q = bellman_q(mdp, r, q_v.v);
  return finish(mdp, std::move(r), std::move(q_v), SolverDiagnostics{"constructive"});
}

}  // namespace

AttackSolution constructive_attack(const Mdp& mdp, const DetPolicy& target, double epsilon) {
  const RewardTable eps_prime = epsilon_prime(mdp, target, epsilon);
  auto out = constructive_with(mdp, target, eps_prime, occupancy(mdp, target), value_iteration(mdp, mdp.base_reward()));
  VerifyOptions verify;
  verify.eps_prime = eps_prime;
  out.feasibility = verify_forced(mdp, out.r_hat, target, epsilon, verify);
  return out;
}

AttackSolution solve_attack(const AttackProblem& problem, const AttackOptions& options) {
  const Mdp& mdp = problem.mdp;
  check_policy(mdp, problem.target);
  const auto occ = occupancy(mdp, problem.target);
  const qp::Problem qp = build_qp(problem, occ);
  const QpLayout L{mdp.n_states(), mdp.n_actions()};
  const auto optimal = value_iteration(mdp, mdp.base_reward());

  // Any ε′ ≥ 0 gives a feasible constructive point (V = V*, Q = R′ + γPV); it
  // seeds the solver and bounds the returned cost from above.
  const AttackSolution constructive = constructive_with(mdp, problem.target, problem.eps_prime, occ, optimal);
  std::optional<qp::WarmStart> warm;
  if (options.warm_start) {
    Eigen::VectorXd x(L.size());
    for (int s = 0; s < L.S; ++s) {
      for (int a = 0; a < L.A; ++a) x(L.q(s, a)) = constructive.q_v.q(s, a);
      x(L.v(s)) = constructive.q_v.v(s);
    }
    warm = qp::WarmStart{x, Eigen::VectorXd()};
  }

  const auto result = qp::solve(qp, options.qp, warm);
  if (result.status == qp::Status::max_iterations) {
    throw Error(ErrorCode::SolverDiverged, "ADMM stopped at " + std::to_string(result.iterations) +
                                               " iterations with primal residual " + std::to_string(result.primal_residual) +
                                               ", dual residual " + std::to_string(result.dual_residual));
  }

  Eigen::MatrixXd q(L.S, L.A);
  Eigen::VectorXd v(L.S);
  for (int s = 0; s < L.S; ++s) {
    for (int a = 0; a < L.A; ++a) q(s, a) = result.x(L.q(s, a));
    v(s) = result.x(L.v(s));
  }
  project_feasible(problem, occ, q, v);
  RewardTable r_hat(L.S, L.A);
  for (int a = 0; a < L.A; ++a) r_hat.col(a) = q.col(a) - mdp.gamma() * (mdp.transitions(a) * v);

  SolverDiagnostics diag;
  diag.method = result.status == qp::Status::solved_polished ? "admm+polish" : "admm";
  diag.iterations = result.iterations;
  diag.rho_updates = result.rho_updates;
  diag.primal_residual = result.primal_residual;
  diag.dual_residual = result.dual_residual;

  AttackSolution out = finish(mdp, std::move(r_hat), ValueTables{q, v, 0.0}, diag);
  if (constructive.cost < out.cost) {
    out.r_hat = constructive.r_hat;
    out.cost = constructive.cost;
    out.q_v = constructive.q_v;
    out.diagnostics.method += "+constructive-fallback";
  }

  if (!problem.custom_eps_prime) {
    VerifyOptions verify = options.verify;
    verify.tol_feas = options.tol_feas;
    verify.eps_prime = problem.eps_prime;
    out.feasibility = verify_forced(mdp, out.r_hat, problem.target, problem.epsilon, verify);
  } else {
    const auto star = value_iteration(mdp, out.r_hat);
    out.feasibility = check_relaxed_constraints(mdp, out.r_hat, star.q, star.v, problem.target, problem.eps_prime,
                                                options.tol_feas);
  }
  return out;
}

FeasibilityReport check_relaxed_constraints(const Mdp& mdp, const RewardTable& reward, const Eigen::MatrixXd& q,
                                            const Eigen::VectorXd& v, const DetPolicy& target,
                                            const RewardTable& eps_prime, double tol_feas) {
  FeasibilityReport report;
  report.mode = FeasibilityReport::Mode::bellman_closure;
  report.min_score_gap = kInf;
  const auto occ = occupancy(mdp, target);
  const Eigen::MatrixXd implied = bellman_q(mdp, reward, v);
  for (int s = 0; s < mdp.n_states(); ++s) {
    const int t = target[s];
    for (int a = 0; a < mdp.n_actions(); ++a) {
      record(report, {"rqv", s, a, std::abs(implied(s, a) - q(s, a)), std::nullopt});
      if (occ.visited(s)) {
        if (a != t) record(report, {"ge", s, a, q(s, a) + eps_prime(s, a) - q(s, t), std::nullopt});
      } else {
        record(report, {"vqzero", s, a, q(s, a) - v(s), std::nullopt});
      }
    }
    if (occ.visited(s)) record(report, {"vqone", s, t, std::abs(v(s) - q(s, t)), std::nullopt});
  }
  report.max_violation = std::max(report.max_violation, 0.0);
  report.passed = report.max_violation <= tol_feas;
  return report;
}

FeasibilityReport verify_forced(const Mdp& mdp, const RewardTable& r_hat, const DetPolicy& target, double epsilon,
                                const VerifyOptions& options) {
  check_policy(mdp, target);
  const std::int64_t count = policy_count(mdp.n_states(), mdp.n_actions());
  if (count > options.enumeration_cap) {
    const RewardTable eps_prime = options.eps_prime ? *options.eps_prime : epsilon_prime(mdp, target, epsilon);
    const auto star = value_iteration(mdp, r_hat);
    return check_relaxed_constraints(mdp, r_hat, star.q, star.v, target, eps_prime, options.tol_feas);
  }

  FeasibilityReport report;
  report.mode = FeasibilityReport::Mode::enumerated_policies;
  report.min_score_gap = kInf;
  const auto occ = occupancy(mdp, target);
  const double target_score = score(mdp, r_hat, target);
  PolicyEnumeration::all(mdp, options.enumeration_cap).for_each([&](const DetPolicy& pi) {
    ++report.policies_checked;
    const bool deviates = std::any_of(occ.support.begin(), occ.support.end(), [&](int s) { return pi[s] != target[s]; });
    if (!deviates) return;
    const double gap = target_score - score(mdp, r_hat, pi);
    report.min_score_gap = std::min(report.min_score_gap, gap);
    record(report, {"score_gap", -1, -1, epsilon - gap, pi});
  });
  report.passed = report.max_violation <= options.tol_feas;
  return report;
}

}  // namespace aptforge
