#include "support.hpp"

#include "aptforge/error.hpp"
#include "aptforge/instances.hpp"
#include "aptforge/oracle.hpp"
#include "aptforge/special.hpp"

#include <gtest/gtest.h>

using namespace aptforge;
using aptforge::test::b2;
using aptforge::test::only;

TEST(OptSet, B2) {
  EXPECT_EQ(opt_set(b2(), b2().base_reward(), 0.1), std::vector<DetPolicy>{DetPolicy({0})});
  EXPECT_EQ(opt_set(b2(), b2().base_reward(), 2.0).size(), 2u);
  try {
    opt_set(b2(), b2().base_reward(), 0.1, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooManyPolicies);
  }
}

TEST(OptSet, NeverEmpty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mdp m = random_mdp(seed, 3, 3);
    EXPECT_FALSE(opt_set(m, m.base_reward(), 1e-9).empty());
  }
}

TEST(OptSet, ForcedRewardsOnlyAdmitTarget) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Mdp m = random_mdp(seed, 3, 3);
    const DetPolicy target = aptforge::test::random_policy(seed, 3, 3);
    const auto sol = solve_attack(make_attack_problem(m, target, 0.1));
    const auto support = occupancy(m, target).support;
    for (const auto& p : opt_set(m, sol.r_hat, 0.1 - kTolFeas)) {
      for (int s : support) EXPECT_EQ(p[s], target[s]) << seed;
    }
  }
}

TEST(DistinctActions, CollapsesDuplicates) {
  const auto red = x3c_reduction({1, {{1, 2, 3}}}, 0.1, 0.9, 0.5, 1);
  const auto lists = distinct_actions(red.mdp, red.mdp.base_reward(), &red.admissible);
  for (const auto& l : lists) EXPECT_LE(l.size(), 2u);
  const auto lists_b2 = distinct_actions(b2(), b2().base_reward());
  EXPECT_EQ(lists_b2[0].size(), 2u);
}

TEST(AdmissiblePolicies, DedupesUnvisitedStates) {
  MdpFields f;
  f.n_states = 2;
  f.n_actions = 2;
  f.transitions = {Eigen::MatrixXd::Identity(2, 2), Eigen::MatrixXd::Identity(2, 2)};
  f.base_reward = Eigen::MatrixXd::Zero(2, 2);
  f.gamma = 0.9;
  f.initial_dist = Eigen::Vector2d(1, 0);
  const auto pols = admissible_policies(validate_mdp(f), AdmissibleSet::all(2, 2));
  EXPECT_EQ(pols.size(), 2u);
}

TEST(BruteP4, B2Singleton) {
  const auto adm = only(1, 2, 0, 1);
  const auto brute = brute_design_p4(b2(), adm, 1.0, 0.1);
  const auto sp = special_design(b2(), adm, 0.1, 1.0);
  EXPECT_EQ(brute.policy, sp.policy);
  EXPECT_NEAR(brute.objective, sp.objective, 1e-6);
}

TEST(BruteP4, LambdaZeroIsCheapest) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const Mdp m = random_mdp(seed, 3, 2);
    const auto adm = random_admissible(seed, 3, 2);
    const auto brute = brute_design_p4(m, adm, 0.0, 0.1);
    for (const auto& p : admissible_policies(m, adm)) {
      EXPECT_LE(brute.cost, solve_attack(make_attack_problem(m, p, 0.1)).cost + 1e-9) << seed;
    }
  }
}

TEST(BruteDeltaQ, Basics) {
  const Mdp m = random_mdp(2, 3, 3);
  EXPECT_NEAR(brute_delta_q(m, AdmissibleSet::all(3, 3)), 0.0, 1e-12);
  EXPECT_NEAR(brute_delta_q(b2(), only(1, 2, 0, 1)), 1.0, 1e-9);
}
