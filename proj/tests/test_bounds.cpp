#include "support.hpp"

#include "aptforge/bounds.hpp"
#include "aptforge/error.hpp"
#include "aptforge/instances.hpp"
#include "aptforge/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace aptforge;
using aptforge::test::b2;
using aptforge::test::only;

TEST(DeltaRho, Basics) {
  const Mdp m = random_mdp(2, 4, 3);
  EXPECT_NEAR(delta_rho(m, AdmissibleSet::all(4, 3)), 0.0, 1e-12);
  EXPECT_NEAR(delta_rho(b2(), only(1, 2, 0, 1)), 1.0, 1e-12);
}

TEST(DeltaRho, MatchesEnumeration) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Mdp m = random_mdp(seed, 3, 3);
    const auto adm = random_admissible(seed, 3, 3);
    const double star = score(m, m.base_reward(), optimal_policy(m, m.base_reward()));
    double gap = 1e300;
    for (const auto& p : admissible_policies(m, adm)) gap = std::min(gap, star - score(m, m.base_reward(), p));
    EXPECT_NEAR(delta_rho(m, adm), gap, 1e-9) << seed;
  }
}

TEST(DeltaQPi, Basics) {
  const Mdp m = random_mdp(6, 4, 3);
  EXPECT_NEAR(delta_q_pi(m, optimal_policy(m, m.base_reward())), 0.0, 1e-12);
  EXPECT_NEAR(delta_q_pi(b2(), DetPolicy({1})), 1.0, 1e-9);
}

TEST(MuMin, Exact) {
  auto r = mu_min(b2());
  EXPECT_EQ(r.method, MuMinMethod::exact);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  r = mu_min(aptforge::test::cycle2());
  EXPECT_EQ(r.method, MuMinMethod::exact);
  EXPECT_NEAR(r.value, 0.473684210526316, 1e-12);
}

TEST(MuMin, SpecialMdpIsPolicyIndependent) {
  RandomMdpOptions o;
  o.special = true;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mdp m = random_mdp(seed, 5, 3, o);
    const double want = occupancy(m, DetPolicy::constant(5, 0)).min_positive;
    MuMinOptions sampled;
    sampled.cap = 10;
    sampled.samples = 20;
    const auto s = mu_min(m, sampled);
    EXPECT_EQ(s.method, MuMinMethod::sampled_upper_estimate);
    EXPECT_NEAR(s.value, want, 1e-12) << seed;
    EXPECT_NEAR(mu_min(m).value, want, 1e-12) << seed;
  }
}

TEST(MuMin, SampledIsUpperEstimate) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Mdp m = random_mdp(seed, 4, 3);
    MuMinOptions sampled;
    sampled.cap = 1;
    sampled.samples = 30;
    sampled.seed = seed;
    EXPECT_GE(mu_min(m, sampled).value, mu_min(m).value - 1e-15) << seed;
  }
}

TEST(PhiBounds, B2) {
  const auto adm = only(1, 2, 0, 1);
  const auto outcome = design(b2(), adm, Strategy::constrain_optimize, 1.0, 0.1);
  BoundsOptions o;
  o.optimal_phi = outcome.phi;
  const auto rep = phi_bounds(b2(), adm, 1.0, 0.1, outcome, o);
  EXPECT_NEAR(rep.delta_rho, 1.0, 1e-12);
  EXPECT_NEAR(rep.delta_q, 1.0, 1e-9);
  EXPECT_NEAR(rep.mu_min.value, 1.0, 1e-12);
  EXPECT_NEAR(rep.thm3.lower, 1.05, 1e-9);
  EXPECT_NEAR(rep.thm3.upper, 2.0 + 0.1 * std::sqrt(2.0), 1e-9);
  EXPECT_NEAR(outcome.phi, 1.7778174593052023, 1e-6);
  EXPECT_TRUE(*rep.optimal_phi_in_thm3);
  EXPECT_TRUE(*rep.optimal_phi_in_thm4);
  EXPECT_TRUE(rep.corollary_holds);
  EXPECT_FALSE(rep.advisory);
}

TEST(PhiBounds, AllAdmissible) {
  const Mdp m = random_mdp(8, 3, 2);
  const auto adm = AdmissibleSet::all(3, 2);
  const auto outcome = design(m, adm, Strategy::opt_adm, 1.0, 0.1);
  const auto rep = phi_bounds(m, adm, 1.0, 0.1, outcome);
  const double slack = 0.1 * std::sqrt(6.0) / rep.mu_min.value;
  EXPECT_NEAR(rep.thm3.lower, 0.0, 1e-12);
  EXPECT_NEAR(rep.thm3.upper, slack, 1e-9);
  EXPECT_NEAR(rep.thm4.lower, 0.0, 1e-12);
  EXPECT_NEAR(rep.thm4.upper, slack, 1e-9);
}

TEST(PhiBounds, Coefficients) {
  const Mdp m = random_mdp(12, 3, 3);
  const auto adm = random_admissible(12, 3, 3);
  const auto outcome = design(m, adm, Strategy::qgreedy, 0.7, 0.2);
  const auto rep = phi_bounds(m, adm, 0.7, 0.2, outcome);
  const double mu = rep.mu_min.value;
  EXPECT_DOUBLE_EQ(rep.alpha_rho, 0.7 + 0.05);
  EXPECT_DOUBLE_EQ(rep.beta_rho, 0.7 + 1.0 / mu);
  EXPECT_DOUBLE_EQ(rep.alpha_q, 0.7 * mu + 0.05);
  EXPECT_DOUBLE_EQ(rep.beta_q, 0.7 + std::sqrt(3.0));
}
