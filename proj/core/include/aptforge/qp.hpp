#pragma once

#include <Eigen/Dense>

#include <optional>

namespace aptforge::qp {

/// minimize ½ xᵀPx + qᵀx  subject to  lower ≤ Ax ≤ upper.
/// Infinite bounds are allowed; rows with lower == upper are equalities.
struct Problem {
  Eigen::MatrixXd P;
  Eigen::VectorXd q;
  Eigen::MatrixXd A;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

struct Settings {
  double rho = 1.0;
  double sigma = 1e-6;
  double alpha = 1.6;
  double eps_abs = 1e-9;
  double eps_rel = 1e-9;
  int max_iterations = 200000;
  int scaling_iterations = 10;
  /// Residual-ratio threshold that triggers a x10 / ÷10 penalty update.
  double adaptive_rho_ratio = 10.0;
  int adaptive_rho_interval = 25;
  /// Attempt an active-set polish every this many iterations (0 disables early polishing).
  int polish_interval = 100;
  bool polish = true;
};

enum class Status { solved, solved_polished, max_iterations };

struct Result {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  Status status = Status::max_iterations;
  int iterations = 0;
  int rho_updates = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
};

struct WarmStart {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
};

/// Operator-splitting ADMM on a dense problem. Polishing solves the KKT system
/// of the guessed active set and is accepted only when the KKT conditions hold.
Result solve(const Problem& problem, const Settings& settings = {}, const std::optional<WarmStart>& warm = std::nullopt);

struct KktResiduals {
  double primal = 0.0;      // max bound violation of Ax
  double stationarity = 0.0;  // ‖Px + q + Aᵀy‖∞
  double sign = 0.0;        // worst multiplier with the wrong sign
  double complementarity = 0.0;
};

KktResiduals kkt_residuals(const Problem& problem, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

}  // namespace aptforge::qp
