#include "aptforge/io.hpp"

#include "aptforge/error.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace aptforge {

namespace {

using json = nlohmann::json;

json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

json table(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(number(m(r, c)));
    out.push_back(std::move(row));
  }
  return out;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw Error(ErrorCode::Parse, std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("field '") + name + "': " + e.what());
  }
}

json feasibility_json(const FeasibilityReport& f) {
  json worst = json::array();
  for (const auto& o : f.worst) {
    json item{{"constraint", o.constraint}, {"state", o.state}, {"action", o.action}, {"violation", number(o.violation)}};
    if (o.policy) item["policy"] = o.policy->actions;
    worst.push_back(std::move(item));
  }
  return json{{"mode", to_string(f.mode)},
              {"passed", f.passed},
              {"max_violation", number(f.max_violation)},
              {"min_score_gap", number(f.min_score_gap)},
              {"policies_checked", f.policies_checked},
              {"worst", std::move(worst)}};
}

json diagnostics_json(const SolverDiagnostics& d) {
  return json{{"method", d.method},
              {"iterations", d.iterations},
              {"rho_updates", d.rho_updates},
              {"primal_residual", number(d.primal_residual)},
              {"dual_residual", number(d.dual_residual)}};
}

json outcome_json(const DesignOutcome& o) {
  return json{{"strategy", o.strategy},
              {"policy", o.policy.actions},
              {"admissible", o.admissible},
              {"lambda", number(o.lambda)},
              {"epsilon", number(o.epsilon)},
              {"cost", number(o.cost)},
              {"score", number(o.score)},
              {"optimal_score", number(o.optimal_score)},
              {"objective", number(o.objective)},
              {"phi", number(o.phi)},
              {"r_hat", table(o.r_hat)},
              {"diagnostics", diagnostics_json(o.diagnostics)},
              {"feasibility", feasibility_json(o.feasibility)}};
}

json interval_json(const Interval& i) { return json{{"lower", number(i.lower)}, {"upper", number(i.upper)}}; }

json bounds_json(const BoundsReport& b) {
  json out{{"delta_rho", number(b.delta_rho)},
           {"delta_q", number(b.delta_q)},
           {"mu_min", {{"value", number(b.mu_min.value)}, {"method", to_string(b.mu_min.method)},
                       {"policies_checked", b.mu_min.policies_checked}}},
           {"alpha_rho", number(b.alpha_rho)},
           {"beta_rho", number(b.beta_rho)},
           {"alpha_q", number(b.alpha_q)},
           {"beta_q", number(b.beta_q)},
           {"thm3_interval", interval_json(b.thm3)},
           {"thm4_interval", interval_json(b.thm4)},
           {"corollary_floor", number(b.corollary_floor)},
           {"outcome_delta_q", number(b.outcome_delta_q)},
           {"corollary_holds", b.corollary_holds},
           {"advisory", b.advisory}};
  if (b.optimal_phi) {
    out["optimal_phi"] = number(*b.optimal_phi);
    out["optimal_phi_in_thm3"] = *b.optimal_phi_in_thm3;
    out["optimal_phi_in_thm4"] = *b.optimal_phi_in_thm4;
  }
  return out;
}

}  // namespace

MdpDocument parse_mdp_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("MDP JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::Parse, "MDP JSON must be an object");
  MdpFields f;
  f.n_states = field<int>(j, "n_states");
  f.n_actions = field<int>(j, "n_actions");
  f.gamma = field<double>(j, "gamma");
  if (f.n_states < 1 || f.n_actions < 1) throw Error(ErrorCode::BadShape, "n_states and n_actions must be positive");
  const auto S = static_cast<size_t>(f.n_states);
  const auto A = static_cast<size_t>(f.n_actions);

  const auto sigma = field<std::vector<double>>(j, "sigma");
  if (sigma.size() != S) throw Error(ErrorCode::BadShape, "sigma has " + std::to_string(sigma.size()) + " entries");
  f.initial_dist = Eigen::Map<const Eigen::VectorXd>(sigma.data(), static_cast<Eigen::Index>(S));

  const auto p = field<std::vector<std::vector<std::vector<double>>>>(j, "P");
  if (p.size() != S) throw Error(ErrorCode::BadShape, "P has " + std::to_string(p.size()) + " states");
  f.transitions.assign(A, Eigen::MatrixXd::Zero(f.n_states, f.n_states));
  for (size_t s = 0; s < S; ++s) {
    if (p[s].size() != A) throw Error(ErrorCode::BadShape, "P[" + std::to_string(s) + "] has wrong action count");
    for (size_t a = 0; a < A; ++a) {
      if (p[s][a].size() != S) {
        throw Error(ErrorCode::BadShape, "P[" + std::to_string(s) + "][" + std::to_string(a) + "] has wrong length");
      }
      for (size_t t = 0; t < S; ++t) f.transitions[a](static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(t)) = p[s][a][t];
    }
  }

  const auto r = field<std::vector<std::vector<double>>>(j, "R");
  if (r.size() != S) throw Error(ErrorCode::BadShape, "R has " + std::to_string(r.size()) + " rows");
  f.base_reward.resize(f.n_states, f.n_actions);
  for (size_t s = 0; s < S; ++s) {
    if (r[s].size() != A) throw Error(ErrorCode::BadShape, "R[" + std::to_string(s) + "] has wrong length");
    for (size_t a = 0; a < A; ++a) f.base_reward(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(a)) = r[s][a];
  }

  MdpDocument doc{validate_mdp(std::move(f)), std::nullopt};
  if (j.contains("admissible")) {
    const auto adm = field<std::vector<std::vector<bool>>>(j, "admissible");
    if (adm.size() != S) throw Error(ErrorCode::BadShape, "admissible has wrong row count");
    AdmissibleSet mask = AdmissibleSet::none(static_cast<int>(S), static_cast<int>(A));
    for (size_t s = 0; s < S; ++s) {
      if (adm[s].size() != A) throw Error(ErrorCode::BadShape, "admissible[" + std::to_string(s) + "] has wrong length");
      for (size_t a = 0; a < A; ++a) mask.set(static_cast<int>(s), static_cast<int>(a), adm[s][a]);
    }
    doc.admissible = std::move(mask);
  }
  return doc;
}

MdpDocument load_mdp_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Parse, "cannot open MDP file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mdp_json(buf.str());
}

std::string mdp_to_json(const Mdp& mdp, const AdmissibleSet* admissible, int indent) {
  const int S = mdp.n_states();
  const int A = mdp.n_actions();
  json p = json::array();
  for (int s = 0; s < S; ++s) {
    json per_action = json::array();
    for (int a = 0; a < A; ++a) {
      json row = json::array();
      for (int t = 0; t < S; ++t) row.push_back(mdp.prob(s, a, t));
      per_action.push_back(std::move(row));
    }
    p.push_back(std::move(per_action));
  }
  json out{{"n_states", S}, {"n_actions", A}, {"gamma", mdp.gamma()},
           {"sigma", vector_json(mdp.initial_dist())}, {"P", std::move(p)}, {"R", table(mdp.base_reward())}};
  if (admissible) {
    json adm = json::array();
    for (int s = 0; s < S; ++s) {
      json row = json::array();
      for (int a = 0; a < A; ++a) row.push_back((*admissible)(s, a));
      adm.push_back(std::move(row));
    }
    out["admissible"] = std::move(adm);
  }
  return out.dump(indent);
}

std::string attack_to_json(const AttackSolution& attack, int indent) {
  json out{{"cost", number(attack.cost)},
           {"r_hat", table(attack.r_hat)},
           {"diagnostics", diagnostics_json(attack.diagnostics)},
           {"feasibility", feasibility_json(attack.feasibility)}};
  return out.dump(indent);
}

std::string outcome_to_json(const DesignOutcome& outcome, int indent) { return outcome_json(outcome).dump(indent); }

std::string bounds_to_json(const BoundsReport& report, int indent) { return bounds_json(report).dump(indent); }

std::string result_to_json(const DesignOutcome& outcome, const BoundsReport& bounds, int indent) {
  json out{{"outcome", outcome_json(outcome)}, {"bounds", bounds_json(bounds)}};
  return out.dump(indent);
}

}  // namespace aptforge
