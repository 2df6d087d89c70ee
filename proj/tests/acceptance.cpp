// Acceptance suite: one line per criterion.
#include "support.hpp"

#include "aptforge/attack.hpp"
#include "aptforge/bounds.hpp"
#include "aptforge/enumeration.hpp"
#include "aptforge/error.hpp"
#include "aptforge/instances.hpp"
#include "aptforge/oracle.hpp"
#include "aptforge/policy_search.hpp"
#include "aptforge/special.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace aptforge;

namespace {

constexpr double kCostTol1 = 1e-5;
constexpr double kRewardTol1 = 1e-4;
constexpr double kSeconds1 = 30.0;
constexpr double kScoreSlack2 = 1e-6;
constexpr double kSeconds2 = 60.0;
constexpr double kDeltaQTol3 = 1e-9;
constexpr double kBoundSlack4 = 1e-6;
constexpr double kScoreDiffTol5 = 1e-9;
constexpr double kNormTol5 = 1e-10;
constexpr double kSameOccTol5 = 1e-10;
constexpr double kCertTol6 = 1e-12;
constexpr double kPaperTol7 = 0.15;
constexpr double kSeconds7 = 120.0;
constexpr double kMonoTol8 = 1e-6;

struct Verdict {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

Verdict criterion1() {
  const auto t0 = Clock::now();
  RandomMdpOptions o;
  o.special = true;
  double worst_cost = 0.0, worst_r = 0.0;
  const std::array<double, 3> eps{0.0, 0.1, 1.0};
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto [S, A] = aptforge::test::small_shape(seed, 5, 6);
    const Mdp m = random_mdp(seed, S, A, o);
    const DetPolicy t = aptforge::test::random_policy(seed, S, A);
    const double e = eps[seed % 3];
    const auto cf = closed_form_attack(m, t, e);
    const auto qp = solve_attack(make_attack_problem(m, t, e));
    worst_cost = std::max(worst_cost, std::abs(cf.cost - qp.cost));
    worst_r = std::max(worst_r, (cf.r_hat - qp.r_hat).cwiseAbs().maxCoeff());
  }
  const double secs = seconds_since(t0);
  return {worst_cost <= kCostTol1 && worst_r <= kRewardTol1 && secs < kSeconds1,
          "max |dcost| " + fmt("%.2e", worst_cost) + ", max |dR| " + fmt("%.2e", worst_r) + ", " + fmt("%.1fs", secs)};
}

Verdict criterion2() {
  const auto t0 = Clock::now();
  int failures = 0;
  double worst_gap_shortfall = 0.0;
  const std::array<double, 4> eps{0.01, 0.1, 0.5, 1.0};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto [S, A] = aptforge::test::small_shape(seed + 1000, 4, 3);
    const Mdp m = random_mdp(seed + 1000, S, A);
    const DetPolicy t = aptforge::test::random_policy(seed + 1000, S, A);
    const double e = eps[seed % 4];
    const auto sol = solve_attack(make_attack_problem(m, t, e));
    VerifyOptions v;
    v.tol_feas = kScoreSlack2;
    const auto rep = verify_forced(m, sol.r_hat, t, e, v);
    if (rep.mode != FeasibilityReport::Mode::enumerated_policies || !rep.passed) ++failures;
    if (std::isfinite(rep.min_score_gap)) worst_gap_shortfall = std::max(worst_gap_shortfall, e - rep.min_score_gap);
  }
  const double secs = seconds_since(t0);
  return {failures == 0 && secs < kSeconds2,
          std::to_string(failures) + "/200 failed, worst eps - gap " + fmt("%.2e", worst_gap_shortfall) + ", " +
              fmt("%.1fs", secs)};
}

Verdict criterion3() {
  double worst = 0.0;
  int n = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const auto [S, A] = aptforge::test::small_shape(seed + 2000, 4, 4);
    const Mdp m = random_mdp(seed + 2000, S, A);
    const auto adm = random_admissible(seed + 2000, S, A, 0.5);
    worst = std::max(worst, std::abs(qgreedy(m, adm).delta_q - brute_delta_q(m, adm)));
    ++n;
  }
  return {worst <= kDeltaQTol3, std::to_string(n) + " instances, max |dDeltaQ| " + fmt("%.2e", worst)};
}

Verdict criterion4() {
  int outside = 0, corollary = 0, attacks = 0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto [S, A] = aptforge::test::small_shape(seed + 3000, 3, 3);
    const Mdp m = random_mdp(seed + 3000, S, A);
    const auto adm = random_admissible(seed + 3000, S, A, 0.5);
    const double lambda = 0.5 + static_cast<double>(seed % 3) * 0.5;
    const double eps = 0.1;
    const auto best = brute_design_p4(m, adm, lambda, eps);
    BoundsOptions o;
    o.optimal_phi = best.phi;
    o.slack = kBoundSlack4;
    const auto rep = phi_bounds(m, adm, lambda, eps, best, o);
    if (!*rep.optimal_phi_in_thm3 || !*rep.optimal_phi_in_thm4) ++outside;
    PolicyEnumeration::all(m, kOracleCap).for_each([&](const DetPolicy& pi) {
      const auto sol = solve_attack(make_attack_problem(m, pi, eps));
      ++attacks;
      if (sol.cost < (1.0 - m.gamma()) / 2.0 * delta_q_pi(m, pi) - kBoundSlack4) ++corollary;
    });
  }
  return {outside == 0 && corollary == 0, std::to_string(outside) + "/50 optima outside an interval, " +
                                              std::to_string(corollary) + "/" + std::to_string(attacks) +
                                              " attacks below the corollary floor"};
}

Verdict criterion5() {
  double diff = 0.0, norm = 0.0, same = 0.0;
  int same_cases = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    const auto [S, A] = aptforge::test::small_shape(seed + 4000, 7, 4);
    RandomMdpOptions o;
    o.density = 0.3;
    o.sigma_density = 0.3;
    const Mdp m = random_mdp(seed + 4000, S, A, o);
    const DetPolicy p1 = aptforge::test::random_policy(seed, S, A);
    const DetPolicy p2 = aptforge::test::random_policy(seed + 77, S, A);
    const auto d = score_diff_check(m, m.base_reward(), p1, p2);
    diff = std::max(diff, std::abs(d.direct - d.identity));
    const auto occ = occupancy(m, p1);
    norm = std::max(norm, std::abs(occ.mu.sum() - 1.0));
    DetPolicy p3 = p2;
    for (int s : occ.support) p3[s] = p1[s];
    same = std::max(same, (occupancy(m, p3).mu - occ.mu).cwiseAbs().maxCoeff());
    ++same_cases;
  }
  return {diff <= kScoreDiffTol5 && norm <= kNormTol5 && same <= kSameOccTol5,
          "150 cases each: score-diff " + fmt("%.2e", diff) + ", normalization " + fmt("%.2e", norm) +
              ", same-occupancy " + fmt("%.2e", same)};
}

Verdict criterion6() {
  struct Case {
    X3cInstance inst;
    std::vector<int> cover;
  };
  const std::vector<Case> cases{{{1, {{1, 2, 3}}}, {1}},
                                {{1, {{1, 2, 3}, {1, 2, 3}}}, {2}},
                                {{2, {{1, 2, 3}, {4, 5, 6}, {2, 3, 4}}}, {1, 2}}};
  bool ok = true;
  std::ostringstream d;
  for (const auto& c : cases) {
    const auto red = x3c_reduction(c.inst, 0.1, 0.9, 0.5, 1);
    const RewardTable r = x3c_yes_certificate(red, c.cover);
    const double cost = (r - red.mdp.base_reward()).norm();
    const double want = std::sqrt(static_cast<double>(c.inst.k));
    const auto choices = distinct_actions(red.mdp, r, &red.admissible);
    const auto opt = opt_set(red.mdp, r, red.epsilon, choices);
    int inadmissible = 0;
    for (const auto& p : opt)
      if (!is_admissible(red.mdp, red.admissible, p)) ++inadmissible;
    ok = ok && std::abs(cost - want) <= kCertTol6 && inadmissible == 0 && !opt.empty();
    d << "k=" << c.inst.k << " l=" << c.inst.subsets.size() << " cost " << fmt("%.12f", cost) << " opt-set "
      << opt.size() << " inadm " << inadmissible << "; ";
  }
  return {ok, d.str()};
}

struct PaperEnv {
  const char* name;
  std::array<double, 4> target;
};

struct EnvResult {
  std::array<double, 4> objective{};
};

EnvResult run_env(const std::string& name) {
  const auto g = grid_from_config(load_grid_spec(std::string(APTFORGE_TEST_DATA_DIR) + "/envs/" + name + ".json"));
  EnvResult r;
  const std::array<Strategy, 4> order{Strategy::opt, Strategy::opt_adm, Strategy::qgreedy, Strategy::constrain_optimize};
  for (size_t i = 0; i < 4; ++i) r.objective[i] = design(g.mdp, g.admissible, order[i], 1.0, 0.1).objective;
  return r;
}

Verdict criterion7() {
  const auto t0 = Clock::now();
  const std::array<PaperEnv, 3> envs{{{"cliff", {0.27, 1.59, 3.93, 1.59}},
                                      {"action_hacking", {-2.04, 14.96, 5.00, 3.82}},
                                      {"grass_mud", {-9.54, 9.46, 17.26, 7.92}}}};
  bool numbers = true, qualitative = true;
  std::ostringstream d;
  for (const auto& env : envs) {
    const auto r = run_env(env.name);
    double worst = 0.0;
    for (size_t i = 0; i < 4; ++i) worst = std::max(worst, std::abs(r.objective[i] - env.target[i]));
    numbers = numbers && worst <= kPaperTol7;
    const double adm = r.objective[1], qg = r.objective[2], co = r.objective[3];
    if (std::string(env.name) == "cliff") qualitative = qualitative && std::abs(co - adm) <= 1e-6;
    else qualitative = qualitative && co < adm - 1e-9 && co < qg - 1e-9;
    d << env.name << " (" << fmt("%.2f", r.objective[0]) << ", " << fmt("%.2f", r.objective[1]) << ", "
      << fmt("%.2f", r.objective[2]) << ", " << fmt("%.2f", r.objective[3]) << ") max err " << fmt("%.2f", worst) << "; ";
  }
  const double secs = seconds_since(t0);
  d << "qualitative " << (qualitative ? "ok" : "violated") << ", " << fmt("%.1fs", secs);
  return {numbers && qualitative && secs < kSeconds7, d.str()};
}

Verdict criterion8() {
  const std::array<double, 5> eps{0.01, 0.05, 0.1, 0.5, 1.0};
  bool ok = true;
  std::ostringstream d;
  for (const char* name : {"cliff", "action_hacking", "grass_mud"}) {
    const auto g = grid_from_config(load_grid_spec(std::string(APTFORGE_TEST_DATA_DIR) + "/envs/" + name + ".json"));
    const DetPolicy target = optimal_admissible(g.mdp, g.admissible);
    double prev = -1.0;
    d << name << " [";
    for (double e : eps) {
      const double cost = solve_attack(make_attack_problem(g.mdp, target, e)).cost;
      ok = ok && cost >= prev - kMonoTol8;
      prev = cost;
      d << fmt("%.4f", cost) << (e == eps.back() ? "" : " ");
    }
    d << "] ";
  }
  return {ok, d.str()};
}

}  // namespace

int main() {
  const std::array<std::function<Verdict()>, 8> criteria{criterion1, criterion2, criterion3, criterion4,
                                                          criterion5, criterion6, criterion7, criterion8};
  constexpr int kBestEffort = 7;
  int required_failures = 0;
  for (int i = 0; i < 8; ++i) {
    Verdict v;
    try {
      v = criteria[static_cast<size_t>(i)]();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    const bool best_effort = i + 1 == kBestEffort;
    std::printf("criterion %d: %s  %s%s\n", i + 1, v.pass ? "PASS" : "FAIL", v.detail.c_str(),
                best_effort && !v.pass ? " (best-effort, not counted in exit status)" : "");
    std::fflush(stdout);
    if (!v.pass && !best_effort) ++required_failures;
  }
  return required_failures == 0 ? 0 : 1;
}
