#include <vector>

#include <benchmark/benchmark.h>

#include "linrep/evaluation.hpp"
#include "linrep/gridworld.hpp"
#include "linrep/linalg.hpp"
#include "linrep/representation.hpp"
#include "linrep/sampling.hpp"
#include "linrep/transfer.hpp"

using namespace linrep;

namespace {

GridWorld desk_grid(std::size_t horizon) {
  GridConfig c;
  c.layout = parse_grid("S..#\n#F.#\n#..G\n##..\n");
  c.obs_dim = 40;
  c.obs_noise_std = 0.5;
  c.deviation_prob = 0.05;
  c.reward_noise = 0.5;
  c.horizon = horizon;
  return GridWorld(c);
}

void BM_Svd(benchmark::State& state) {
  const auto n = state.range(0);
  const Matrix a = Matrix::Random(n, n / 2);
  for (auto _ : state) benchmark::DoNotOptimize(svd(a));
}
BENCHMARK(BM_Svd)->Arg(40)->Arg(160)->Arg(400);

void BM_Ridge(benchmark::State& state) {
  const auto p = state.range(0);
  const Matrix x = Matrix::Random(4 * p, p);
  const Vector y = Vector::Random(4 * p);
  for (auto _ : state) benchmark::DoNotOptimize(ridge_solve(x, y, 0.01));
}
BENCHMARK(BM_Ridge)->Arg(40)->Arg(160);

void BM_RidgeBlocked(benchmark::State& state) {
  const GridWorld g = desk_grid(1);
  Rng rng(1);
  const auto samples = sample_observations(g, barycentric_basis(g, BasisMode::kBalanced),
                                           static_cast<std::size_t>(state.range(0)), rng, g.obs_noise_std());
  const Vector y = Vector::Random(static_cast<Eigen::Index>(samples.size()));
  for (auto _ : state) benchmark::DoNotOptimize(ridge_solve_blocked(g, samples, y, 0.01));
}
BENCHMARK(BM_RidgeBlocked)->Arg(1000)->Arg(20000);

void BM_TrainLevel(benchmark::State& state) {
  const GridWorld g = desk_grid(1);
  const std::vector<GridWorld> tasks(static_cast<std::size_t>(state.range(0)), g);
  TrainConfig tc;
  tc.samples_per_task = 2000;
  tc.rank = 20;
  tc.ridge_lambda = 1e-3;
  tc.seed = 3;
  const SamplingDistribution dist = barycentric_basis(g, BasisMode::kBalanced);
  for (auto _ : state) benchmark::DoNotOptimize(train(tasks, dist, tc));
}
BENCHMARK(BM_TrainLevel)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_EvaluatePolicy(benchmark::State& state) {
  const GridWorld g = desk_grid(6);
  const GreedyPolicy policy = oracle_policy(g, optimal_values(build_tabular_oracle(g), 6));
  EvalOptions opts;
  opts.episodes = static_cast<std::size_t>(state.range(0));
  opts.state_episodes = 0;
  for (auto _ : state) {
    Rng rng(4);
    benchmark::DoNotOptimize(evaluate_policy(policy, g, rng, opts));
  }
}
BENCHMARK(BM_EvaluatePolicy)->Arg(2000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
