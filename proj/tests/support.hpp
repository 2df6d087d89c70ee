#pragma once

#include "aptforge/instances.hpp"
#include "aptforge/mdp.hpp"

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace aptforge::test {

/// One state, two self-looping actions, R̄ = [1, 0], γ = 0.9.
inline Mdp b2() {
  MdpFields f;
  f.n_states = 1;
  f.n_actions = 2;
  f.transitions = {Eigen::MatrixXd::Ones(1, 1), Eigen::MatrixXd::Ones(1, 1)};
  f.base_reward = Eigen::MatrixXd(1, 2);
  f.base_reward << 1.0, 0.0;
  f.gamma = 0.9;
  f.initial_dist = Eigen::VectorXd::Ones(1);
  return validate_mdp(std::move(f));
}

/// Two states swapping deterministically under every action; starts in state 0.
inline Mdp cycle2(int n_actions = 2, double gamma = 0.9) {
  MdpFields f;
  f.n_states = 2;
  f.n_actions = n_actions;
  Eigen::MatrixXd swap(2, 2);
  swap << 0, 1, 1, 0;
  f.transitions.assign(static_cast<size_t>(n_actions), swap);
  f.base_reward = Eigen::MatrixXd::Zero(2, n_actions);
  f.gamma = gamma;
  f.initial_dist = Eigen::Vector2d(1.0, 0.0);
  return validate_mdp(std::move(f));
}

inline AdmissibleSet only(int n_states, int n_actions, int s, int a) {
  auto m = AdmissibleSet::all(n_states, n_actions);
  for (int b = 0; b < n_actions; ++b) m.set(s, b, b == a);
  return m;
}

/// Occupancy by sampling s_T with T ~ Geometric(1 - γ).
inline Eigen::VectorXd monte_carlo_occupancy(const Mdp& mdp, const DetPolicy& pi, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto draw = [&](auto&& prob, int n) {
    double x = u(rng);
    for (int i = 0; i < n; ++i) {
      x -= prob(i);
      if (x < 0) return i;
    }
    return n - 1;
  };
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(mdp.n_states());
  for (int k = 0; k < samples; ++k) {
    int s = draw([&](int i) { return mdp.initial_dist()(i); }, mdp.n_states());
    while (u(rng) < mdp.gamma()) s = draw([&](int i) { return mdp.prob(s, pi[s], i); }, mdp.n_states());
    counts(s) += 1.0;
  }
  return counts / samples;
}

/// Root of a monotone function on [lo, hi] by bisection.
inline double bisect(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  const bool rising = f(hi) > f(lo);
  for (int i = 0; i < iters; ++i) {
    const double mid = 0.5 * (lo + hi);
    if ((f(mid) > 0) == rising) hi = mid;
    else lo = mid;
  }
  return 0.5 * (lo + hi);
}

struct Sized {
  int states;
  int actions;
};

/// Seeded small shapes for property sweeps.
inline Sized small_shape(std::uint64_t seed, int max_states, int max_actions) {
  std::mt19937_64 rng(seed * 7919 + 17);
  return {std::uniform_int_distribution<int>(1, max_states)(rng), std::uniform_int_distribution<int>(1, max_actions)(rng)};
}

inline DetPolicy random_policy(std::uint64_t seed, int n_states, int n_actions) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_int_distribution<int> pick(0, n_actions - 1);
  DetPolicy pi = DetPolicy::constant(n_states, 0);
  for (int s = 0; s < n_states; ++s) pi[s] = pick(rng);
  return pi;
}

}  // namespace aptforge::test
