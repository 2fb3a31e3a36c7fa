// Serial reference path vs OpenMP kernels, and sweep throughput by worker count.

#include <benchmark/benchmark.h>

#include "spectral/kernels.hpp"
#include "spectral/rng.hpp"
#include "spectral/synthlab.hpp"

using namespace spectral;
using kernels::Exec;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(r, c);
  fill_normal(m.data(), rng);
  return m;
}

Exec exec_of(const benchmark::State& state) { return state.range(2) ? Exec::parallel : Exec::serial; }

void BM_Gram(benchmark::State& state) {
  const auto n = std::size_t(state.range(0)), d = std::size_t(state.range(1));
  const Matrix x = random_matrix(n, d, 1);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::gram(x, double(n), exec_of(state)));
  state.SetItemsProcessed(std::int64_t(state.iterations() * n * d * d));
}

void BM_Project(benchmark::State& state) {
  const auto n = std::size_t(state.range(0)), d = std::size_t(state.range(1));
  const Matrix x = random_matrix(n, d, 2);
  const Vector w(d, 0.5);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::project(x, w, exec_of(state)));
}

void BM_AffineRows(benchmark::State& state) {
  const auto n = std::size_t(state.range(0)), d = std::size_t(state.range(1));
  const Matrix x = random_matrix(n, d, 3), a = random_matrix(d, d, 4);
  const Vector off(d, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(kernels::affine_rows(x, a, off, exec_of(state)));
}

void BM_Sweep(benchmark::State& state) {
  SyntheticSpec spec;
  spec.dim = 32;
  spec.signal = {0.0, 0.5, 0.5};
  spec.n_per_class = 500;
  SweepConfig cfg;
  cfg.n_grid = {128, 512, 2048};
  cfg.trials = 4;
  cfg.workers = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(spec, cfg));
}

// Args: N, D, parallel.
void kernel_args(benchmark::internal::Benchmark* b) {
  for (long n : {1000, 20000})
    for (long d : {16, 128})
      for (long p : {0, 1}) b->Args({n, d, p});
}

}  // namespace

BENCHMARK(BM_Gram)->Apply(kernel_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Project)->Apply(kernel_args)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_AffineRows)->Apply(kernel_args)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Sweep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
