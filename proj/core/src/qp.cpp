#include "aptforge/qp.hpp"

#include "aptforge/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aptforge::qp {

namespace {

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kEqualityRhoScale = 1e3;
constexpr int kResidualCheckInterval = 5;

double inf_norm(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

double finite_bound_scale(const Problem& p) {
  double scale = 0.0;
  for (Eigen::Index i = 0; i < p.lower.size(); ++i) {
    if (std::isfinite(p.lower(i))) scale = std::max(scale, std::abs(p.lower(i)));
    if (std::isfinite(p.upper(i))) scale = std::max(scale, std::abs(p.upper(i)));
  }
  return scale;
}

struct Scaling {
  Eigen::VectorXd D;  // variables
  Eigen::VectorXd E;  // constraints
  double c = 1.0;     // cost
};

// Modified Ruiz equilibration of the KKT matrix followed by cost scaling.
Scaling equilibrate(const Problem& p, int iterations, Problem& scaled) {
  const Eigen::Index n = p.P.rows();
  const Eigen::Index m = p.A.rows();
  Scaling sc;
  sc.D = Eigen::VectorXd::Ones(n);
  sc.E = Eigen::VectorXd::Ones(m);
  scaled = p;
  auto clamp_norm = [](double v) { return std::clamp(v, 1e-4, 1e4); };
  for (int it = 0; it < iterations; ++it) {
    Eigen::VectorXd d(n), e(m);
    for (Eigen::Index j = 0; j < n; ++j) {
      double norm = scaled.P.col(j).cwiseAbs().maxCoeff();
      if (m > 0) norm = std::max(norm, scaled.A.col(j).cwiseAbs().maxCoeff());
      d(j) = 1.0 / std::sqrt(clamp_norm(norm));
    }
    for (Eigen::Index i = 0; i < m; ++i) {
      e(i) = 1.0 / std::sqrt(clamp_norm(scaled.A.row(i).cwiseAbs().maxCoeff()));
    }
    scaled.P = d.asDiagonal() * scaled.P * d.asDiagonal();
    scaled.q = d.asDiagonal() * scaled.q;
    scaled.A = e.asDiagonal() * scaled.A * d.asDiagonal();
    sc.D = sc.D.cwiseProduct(d);
    sc.E = sc.E.cwiseProduct(e);
  }
  double mean_col = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) mean_col += scaled.P.col(j).cwiseAbs().maxCoeff();
  mean_col /= static_cast<double>(std::max<Eigen::Index>(n, 1));
  const double cost_norm = std::max(mean_col, inf_norm(scaled.q));
  sc.c = 1.0 / clamp_norm(cost_norm > 0.0 ? cost_norm : 1.0);
  scaled.P *= sc.c;
  scaled.q *= sc.c;
  for (Eigen::Index i = 0; i < m; ++i) {
    scaled.lower(i) = std::isfinite(p.lower(i)) ? p.lower(i) * sc.E(i) : p.lower(i);
    scaled.upper(i) = std::isfinite(p.upper(i)) ? p.upper(i) * sc.E(i) : p.upper(i);
  }
  return sc;
}

double objective_value(const Problem& p, const Eigen::VectorXd& x) { return 0.5 * x.dot(p.P * x) + p.q.dot(x); }

// Solves the equality-constrained QP of a guessed active set and keeps it
// only if the KKT conditions of the full problem hold.
std::optional<Result> polish(const Problem& p, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  const Eigen::Index n = p.P.rows();
  const Eigen::Index m = p.A.rows();
  std::vector<Eigen::Index> rows;
  std::vector<double> rhs;
  for (Eigen::Index i = 0; i < m; ++i) {
    const bool equality = p.lower(i) == p.upper(i);
    const bool lower_active = std::isfinite(p.lower(i)) && (z(i) - p.lower(i) < -y(i));
    const bool upper_active = std::isfinite(p.upper(i)) && (p.upper(i) - z(i) < y(i));
    if (equality || lower_active) {
      rows.push_back(i);
      rhs.push_back(p.lower(i));
    } else if (upper_active) {
      rows.push_back(i);
      rhs.push_back(p.upper(i));
    }
  }
  const Eigen::Index k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
  Eigen::VectorXd b(n + k);
  kkt.topLeftCorner(n, n) = p.P;
  b.head(n) = -p.q;
  for (Eigen::Index r = 0; r < k; ++r) {
    kkt.block(n + r, 0, 1, n) = p.A.row(rows[static_cast<size_t>(r)]);
    kkt.block(0, n + r, n, 1) = p.A.row(rows[static_cast<size_t>(r)]).transpose();
    b(n + r) = rhs[static_cast<size_t>(r)];
  }
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(kkt);
  Eigen::VectorXd sol = cod.solve(b);
  // One step of iterative refinement.
  sol += cod.solve(b - kkt * sol);

  Result out;
  out.x = sol.head(n);
  out.y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index r = 0; r < k; ++r) out.y(rows[static_cast<size_t>(r)]) = sol(n + r);

  const auto res = kkt_residuals(p, out.x, out.y);
  const double scale_p = 1.0 + std::max(finite_bound_scale(p), inf_norm(p.A * out.x));
  const double scale_d = 1.0 + std::max({inf_norm(p.P * out.x), inf_norm(p.q), inf_norm(p.A.transpose() * out.y)});
  if (!(res.primal <= 1e-9 * scale_p && res.stationarity <= 1e-9 * scale_d && res.sign <= 1e-9 * scale_d &&
        res.complementarity <= 1e-9 * scale_p * scale_d)) {
    return std::nullopt;
  }
  out.status = Status::solved_polished;
  out.primal_residual = res.primal;
  out.dual_residual = res.stationarity;
  out.objective = objective_value(p, out.x);
  return out;
}

}  // namespace

KktResiduals kkt_residuals(const Problem& p, const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  KktResiduals r;
  const Eigen::VectorXd ax = p.A * x;
  for (Eigen::Index i = 0; i < ax.size(); ++i) {
    r.primal = std::max({r.primal, p.lower(i) - ax(i), ax(i) - p.upper(i)});
    if (!std::isfinite(p.lower(i))) r.sign = std::max(r.sign, -y(i));
    if (!std::isfinite(p.upper(i))) r.sign = std::max(r.sign, y(i));
    if (y(i) < 0.0 && std::isfinite(p.lower(i))) r.complementarity = std::max(r.complementarity, -y(i) * std::abs(ax(i) - p.lower(i)));
    if (y(i) > 0.0 && std::isfinite(p.upper(i))) r.complementarity = std::max(r.complementarity, y(i) * std::abs(p.upper(i) - ax(i)));
  }
  r.stationarity = inf_norm(p.P * x + p.q + p.A.transpose() * y);
  return r;
}

Result solve(const Problem& problem, const Settings& settings, const std::optional<WarmStart>& warm) {
  const Eigen::Index n = problem.P.rows();
  const Eigen::Index m = problem.A.rows();
  if (problem.P.cols() != n || problem.q.size() != n || problem.A.cols() != n || problem.lower.size() != m ||
      problem.upper.size() != m) {
    throw Error(ErrorCode::BadShape, "QP dimensions are inconsistent");
  }

  Problem sp;
  const Scaling sc = equilibrate(problem, settings.scaling_iterations, sp);

  Eigen::VectorXd xs = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd ys = Eigen::VectorXd::Zero(m);
  if (warm) {
    if (warm->x.size() == n) xs = warm->x.cwiseQuotient(sc.D);
    if (warm->y.size() == m) ys = sc.c * warm->y.cwiseQuotient(sc.E);
  }
  Eigen::VectorXd zs = sp.A * xs;
  zs = zs.cwiseMax(sp.lower).cwiseMin(sp.upper);

  double rho = settings.rho;
  Eigen::VectorXd rho_vec(m);
  auto set_rho = [&] {
    for (Eigen::Index i = 0; i < m; ++i) {
      if (sp.lower(i) == sp.upper(i)) {
        rho_vec(i) = kEqualityRhoScale * rho;
      } else if (!std::isfinite(sp.lower(i)) && !std::isfinite(sp.upper(i))) {
        rho_vec(i) = kRhoMin;
      } else {
        rho_vec(i) = rho;
      }
    }
  };
  set_rho();
  Eigen::LLT<Eigen::MatrixXd> factor;
  auto refactor = [&] {
    Eigen::MatrixXd K = sp.P + sp.A.transpose() * rho_vec.asDiagonal() * sp.A;
    K.diagonal().array() += settings.sigma;
    factor.compute(K);
  };
  refactor();

  Result result;
  auto unscale = [&](Eigen::VectorXd& x, Eigen::VectorXd& z, Eigen::VectorXd& y) {
    x = sc.D.cwiseProduct(xs);
    z = zs.cwiseQuotient(sc.E);
    y = sc.E.cwiseProduct(ys) / sc.c;
  };

  Eigen::VectorXd x, z, y;
  for (int it = 1; it <= settings.max_iterations; ++it) {
    const Eigen::VectorXd rhs = settings.sigma * xs - sp.q + sp.A.transpose() * (rho_vec.cwiseProduct(zs) - ys);
    const Eigen::VectorXd x_tilde = factor.solve(rhs);
    const Eigen::VectorXd z_tilde = sp.A * x_tilde;
    xs = settings.alpha * x_tilde + (1.0 - settings.alpha) * xs;
    const Eigen::VectorXd z_relaxed = settings.alpha * z_tilde + (1.0 - settings.alpha) * zs;
    const Eigen::VectorXd z_next = (z_relaxed + ys.cwiseQuotient(rho_vec)).cwiseMax(sp.lower).cwiseMin(sp.upper);
    ys += rho_vec.cwiseProduct(z_relaxed - z_next);
    zs = z_next;
    result.iterations = it;

    const bool check = it % kResidualCheckInterval == 0 || it == settings.max_iterations;
    const bool adapt = settings.adaptive_rho_interval > 0 && it % settings.adaptive_rho_interval == 0;
    const bool try_polish = settings.polish && settings.polish_interval > 0 && it % settings.polish_interval == 0;
    if (!check && !adapt && !try_polish) continue;

    unscale(x, z, y);
    const Eigen::VectorXd ax = problem.A * x;
    const Eigen::VectorXd px = problem.P * x;
    const Eigen::VectorXd aty = problem.A.transpose() * y;
    const double r_prim = inf_norm(ax - z);
    const double r_dual = inf_norm(px + problem.q + aty);
    const double prim_scale = std::max(inf_norm(ax), inf_norm(z));
    const double dual_scale = std::max({inf_norm(px), inf_norm(aty), inf_norm(problem.q)});
    result.primal_residual = r_prim;
    result.dual_residual = r_dual;

    if (r_prim <= settings.eps_abs + settings.eps_rel * prim_scale &&
        r_dual <= settings.eps_abs + settings.eps_rel * dual_scale) {
      if (settings.polish) {
        if (auto polished = polish(problem, z, y)) {
          polished->iterations = it;
          polished->rho_updates = result.rho_updates;
          return *polished;
        }
      }
      result.x = x;
      result.y = y;
      result.status = Status::solved;
      result.objective = objective_value(problem, x);
      return result;
    }
    if (try_polish) {
      if (auto polished = polish(problem, z, y)) {
        polished->iterations = it;
        polished->rho_updates = result.rho_updates;
        return *polished;
      }
    }
    if (adapt) {
      const double prim_norm = r_prim / std::max(prim_scale, 1e-30);
      const double dual_norm = r_dual / std::max(dual_scale, 1e-30);
      double next_rho = rho;
      if (prim_norm > settings.adaptive_rho_ratio * dual_norm) next_rho = std::min(rho * 10.0, kRhoMax);
      if (dual_norm > settings.adaptive_rho_ratio * prim_norm) next_rho = std::max(rho / 10.0, kRhoMin);
      if (next_rho != rho) {
        rho = next_rho;
        set_rho();
        refactor();
        ++result.rho_updates;
      }
    }
  }
  unscale(x, z, y);
  result.x = x;
  result.y = y;
  result.status = Status::max_iterations;
  result.objective = objective_value(problem, x);
  return result;
}

}  // namespace aptforge::qp
