#include "aptforge/attack.hpp"
#include "aptforge/instances.hpp"
#include "aptforge/policy_search.hpp"
#include "aptforge/special.hpp"

#include <benchmark/benchmark.h>

#include <string>

using namespace aptforge;

namespace {

GridInstance env(const char* name) {
  return grid_from_config(load_grid_spec(std::string(APTFORGE_BENCH_DATA_DIR) + "/envs/" + name + ".json"));
}

void BM_ValueIteration(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mdp m = random_mdp(1, n, 4);
  for (auto _ : state) benchmark::DoNotOptimize(value_iteration(m, m.base_reward()));
}
BENCHMARK(BM_ValueIteration)->Arg(10)->Arg(50)->Arg(200);

void BM_Occupancy(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mdp m = random_mdp(2, n, 4);
  const DetPolicy pi = DetPolicy::constant(n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(occupancy(m, pi));
}
BENCHMARK(BM_Occupancy)->Arg(10)->Arg(50)->Arg(200);

void BM_SolveAttack(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Mdp m = random_mdp(3, n, 3);
  const auto problem = make_attack_problem(m, DetPolicy::constant(n, 2), 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_attack(problem));
}
BENCHMARK(BM_SolveAttack)->Arg(4)->Arg(8)->Arg(16)->Unit(benchmark::kMillisecond);

void BM_ClosedForm(benchmark::State& state) {
  RandomMdpOptions o;
  o.special = true;
  const int n = static_cast<int>(state.range(0));
  const Mdp m = random_mdp(4, n, 6, o);
  for (auto _ : state) benchmark::DoNotOptimize(closed_form_attack(m, DetPolicy::constant(n, 0), 0.1));
}
BENCHMARK(BM_ClosedForm)->Arg(5)->Arg(50);

void BM_Strategy(benchmark::State& state, const char* name, Strategy strategy) {
  const auto g = env(name);
  for (auto _ : state) benchmark::DoNotOptimize(design(g.mdp, g.admissible, strategy, 1.0, 0.1));
}
BENCHMARK_CAPTURE(BM_Strategy, cliff_qgreedy, "cliff", Strategy::qgreedy)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Strategy, cliff_co, "cliff", Strategy::constrain_optimize)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Strategy, grass_mud_co, "grass_mud", Strategy::constrain_optimize)->Unit(benchmark::kMillisecond);
BENCHMARK_CAPTURE(BM_Strategy, action_hacking_co, "action_hacking", Strategy::constrain_optimize)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
