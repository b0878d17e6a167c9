#include <benchmark/benchmark.h>

#include <vector>

#include "deepr/connection_store.hpp"
#include "deepr/matrix.hpp"
#include "deepr/mlp.hpp"
#include "deepr/optimizers.hpp"
#include "deepr/rng.hpp"

using namespace deepr;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, RngStream& rng) {
  Matrix m(r, c);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

ConnectionStore mnist_store(double fraction, RngStream& rng) {
  const auto spec = NetworkSpec::mnist();
  const std::vector<double> fractions(spec.weight_layers(), fraction);
  return init_connectivity(spec.shapes(), fractions, rng);
}

void BM_Matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  RngStream rng(1, StreamTag::init);
  const Matrix a = random_matrix(n, n, rng), b = random_matrix(n, n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(matmul(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}
BENCHMARK(BM_Matmul)->Arg(64)->Arg(256);

void BM_SparseForward(benchmark::State& state) {
  RngStream rng(2, StreamTag::init);
  const auto spec = NetworkSpec::mnist();
  const auto store = mnist_store(static_cast<double>(state.range(0)) / 1000.0, rng);
  const auto params = params_from(store);
  const Matrix batch = random_matrix(10, spec.inputs(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(forward(spec, params, batch));
}
BENCHMARK(BM_SparseForward)->Arg(13)->Arg(100)->Arg(1000);

void BM_DeepRStep(benchmark::State& state) {
  RngStream rng(3, StreamTag::init), noise(3, StreamTag::noise), rewire(3, StreamTag::rewire);
  const auto spec = NetworkSpec::mnist();
  auto store = mnist_store(0.013, rng);
  const Matrix batch = random_matrix(10, spec.inputs(), rng);
  std::vector<int> labels(10);
  for (auto& y : labels) y = static_cast<int>(rng.uniform_index(10));
  HyperParams hp;
  std::size_t it = 0;
  for (auto _ : state) {
    const auto params = params_from(store);
    const auto trace = forward(spec, params, batch);
    const auto grads = backward(spec, store, params, trace, labels);
    benchmark::DoNotOptimize(deep_r_step(store, grads, hp, noise, rewire, it++));
  }
}
BENCHMARK(BM_DeepRStep);

void BM_Replenish(benchmark::State& state) {
  RngStream rng(4, StreamTag::init), rewire(4, StreamTag::rewire);
  auto store = mnist_store(0.013, rng);
  const auto drop = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    state.PauseTiming();
    for (std::size_t i = 0; i < drop; ++i) store.set_dormant(store.active()[0]);
    state.ResumeTiming();
    benchmark::DoNotOptimize(store.replenish(rewire));
  }
}
BENCHMARK(BM_Replenish)->Arg(10)->Arg(300);

}  // namespace
BENCHMARK_MAIN();
