// OpenMP kernels against their serial reference versions.
#include <benchmark/benchmark.h>

#include <random>

#include "mlkit/accuracy.hpp"
#include "mlkit/distances.hpp"
#include "mlkit/reference.hpp"

using namespace mlkit;

namespace {

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (double& v : m.data()) v = dist(gen);
  return m;
}

const DistanceKind kKinds[] = {DistanceKind::lp(2.0), DistanceKind::cosine()};

void BM_PairwiseParallel(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 64, 1);
  const DistanceKind& kind = kKinds[state.range(1)];
  for (auto _ : state) benchmark::DoNotOptimize(pairwise_matrix(kind, x, x));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_PairwiseReference(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 64, 1);
  const DistanceKind& kind = kKinds[state.range(1)];
  for (auto _ : state) benchmark::DoNotOptimize(reference::pairwise_matrix(kind, x, x));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_KnnParallel(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 32, 2);
  for (auto _ : state) benchmark::DoNotOptimize(knn(x, x, 10, DistanceKind::lp(2.0), true));
}

void BM_KnnReference(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 32, 2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::knn(x, x, 10, DistanceKind::lp(2.0), true));
  }
}

void BM_AssignParallel(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 32, 3);
  const Matrix centers = random_matrix(16, 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(assign_clusters(x, centers));
}

void BM_AssignReference(benchmark::State& state) {
  const Matrix x = random_matrix(static_cast<std::size_t>(state.range(0)), 32, 3);
  const Matrix centers = random_matrix(16, 32, 4);
  for (auto _ : state) benchmark::DoNotOptimize(reference::assign_clusters(x, centers));
}

}  // namespace

BENCHMARK(BM_PairwiseParallel)->ArgsProduct({{256, 1024}, {0, 1}})->UseRealTime();
BENCHMARK(BM_PairwiseReference)->ArgsProduct({{256, 1024}, {0, 1}})->UseRealTime();
BENCHMARK(BM_KnnParallel)->Arg(512)->Arg(2048)->UseRealTime();
BENCHMARK(BM_KnnReference)->Arg(512)->Arg(2048)->UseRealTime();
BENCHMARK(BM_AssignParallel)->Arg(4096)->Arg(65536)->UseRealTime();
BENCHMARK(BM_AssignReference)->Arg(4096)->Arg(65536)->UseRealTime();

BENCHMARK_MAIN();
