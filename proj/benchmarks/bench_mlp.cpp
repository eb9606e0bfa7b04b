#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "ikd/correction.hpp"
#include "ikd/mlp.hpp"

namespace {

std::vector<ikd::TrainingSample> batch_of(std::size_t n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> v(0.0, 4.2);
  std::uniform_real_distribution<double> av(-4.0, 4.0);
  std::vector<ikd::TrainingSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({v(rng), av(rng), av(rng)});
  }
  return out;
}

void BM_Forward(benchmark::State& state) {
  const auto p = ikd::init_params(1);
  double av = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ikd::forward(p, 2.0, av));
    av += 1e-6;
  }
}
BENCHMARK(BM_Forward);

void BM_Correct(benchmark::State& state) {
  const auto p = ikd::init_params(1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ikd::correct(p, 2.0, 0.63));
  }
}
BENCHMARK(BM_Correct);

void BM_LossAndGrads(benchmark::State& state) {
  const auto p = ikd::init_params(1);
  const auto batch = batch_of(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(ikd::loss_and_grads(p, batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LossAndGrads)->Arg(32)->Arg(256);

void BM_AdamWStep(benchmark::State& state) {
  auto p = ikd::init_params(1);
  const auto grads = ikd::loss_and_grads(p, batch_of(32)).grads;
  ikd::AdamState adam;
  const ikd::AdamConfig cfg;
  for (auto _ : state) {
    ikd::adamw_step(p, grads, adam, cfg);
  }
}
BENCHMARK(BM_AdamWStep);

}  // namespace
