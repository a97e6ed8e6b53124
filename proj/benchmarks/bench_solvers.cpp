#include <random>

#include <benchmark/benchmark.h>

#include "instances.hpp"
#include "tdefumi/pipeline.hpp"

using namespace tdefumi;

namespace {

Dictionary dsrf_dict(int zetas) {
  return prescreen_dictionary(FrequencyGrid::default_grid(), zetas);
}

FeatureVector sample(std::mt19937_64& rng, const Dictionary& d) {
  std::normal_distribution<double> n(0.0, 0.05);
  FeatureVector x = 0.8 * d.atom(3) + 0.3 * d.atom(17);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += n(rng);
  return x;
}

void BM_Lasso(benchmark::State& state) {
  const Dictionary d = dsrf_dict(static_cast<int>(state.range(0)));
  std::mt19937_64 rng(1);
  const FeatureVector x = sample(rng, d);
  SolverConfig cfg;
  cfg.lambda1 = 0.05;
  for (auto _ : state) benchmark::DoNotOptimize(lasso(x, d, cfg));
}
BENCHMARK(BM_Lasso)->Arg(10)->Arg(30)->Arg(60);

void BM_Jomp(benchmark::State& state) {
  const Dictionary d = dsrf_dict(30);
  std::mt19937_64 rng(2);
  const FeatureVector a = sample(rng, d), b = sample(rng, d);
  SolverConfig cfg;
  cfg.max_atoms = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(jomp(a, b, d, cfg));
}
BENCHMARK(BM_Jomp)->Arg(1)->Arg(3);

void BM_PrescreenLane(benchmark::State& state) {
  const SceneConfig scene = table1_scene(1);
  const Lane lane = simulate_lane(scene, 0).first;
  const Dictionary d = dsrf_dict(30);
  SolverConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(prescreen(lane, d, 5, cfg));
}
BENCHMARK(BM_PrescreenLane)->Unit(benchmark::kMillisecond);

void BM_TrainEpoch(benchmark::State& state) {
  const auto grid = FrequencyGrid::default_grid();
  const auto bags = inst::separable_bags(7, grid);
  TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(train(bags, cfg, grid));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
