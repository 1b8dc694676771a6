#include <benchmark/benchmark.h>

#include <vector>

#include "analogy/model.hpp"
#include "analogy/rng.hpp"

namespace {

using namespace analogy;

struct Batch {
  NetworkConfig config;
  Parameters<float> params;
  std::vector<float> x;
  std::vector<std::uint32_t> y;
};

Batch make_batch(std::uint32_t input_dim, std::size_t rows) {
  Batch b;
  b.config.input_dim = input_dim;
  b.config.seed = 1;
  b.params = init_parameters(b.config);
  Rng rng(2);
  b.x.resize(rows * input_dim);
  for (auto& v : b.x) v = static_cast<float>(2.0 * rng.uniform() - 1.0);
  b.y.resize(rows);
  for (auto& v : b.y) v = static_cast<std::uint32_t>(rng.below(2));
  return b;
}

void BM_Forward(benchmark::State& state) {
  const auto dim = static_cast<std::uint32_t>(state.range(0));
  const std::size_t rows = 256;
  const auto b = make_batch(dim, rows);
  for (auto _ : state) {
    auto f = forward<float>(b.params, b.config, b.x, rows, false, 0);
    benchmark::DoNotOptimize(f.scores.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_Forward)->Arg(256)->Arg(3072);

void BM_ForwardBackward(benchmark::State& state) {
  const auto dim = static_cast<std::uint32_t>(state.range(0));
  const std::size_t rows = 256;
  const auto b = make_batch(dim, rows);
  std::uint64_t seed = 0;
  for (auto _ : state) {
    auto g = loss_and_grad<float>(b.params, b.config, b.x, rows, b.y, true, ++seed);
    benchmark::DoNotOptimize(g.loss);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows));
}
BENCHMARK(BM_ForwardBackward)->Arg(256)->Arg(3072);

void BM_AdamStep(benchmark::State& state) {
  auto b = make_batch(3072, 1);
  auto opt = AdamState<float>::fresh(b.params);
  const auto grads = loss_and_grad<float>(b.params, b.config, b.x, 1, b.y, false, 0).grads;
  for (auto _ : state) adam_step(b.params, opt, grads, AdamHyperparams{});
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(b.params.size()));
}
BENCHMARK(BM_AdamStep);

}  // namespace
