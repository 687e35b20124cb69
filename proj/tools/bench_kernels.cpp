// Serial vs OpenMP kernel comparison. Requires google benchmark.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "pc/kernels.hpp"
#include "pc/rng.hpp"

namespace {

std::vector<double> random_vec(std::size_t n, std::uint64_t seed) {
  pc::Rng rng(seed);
  std::vector<double> v(n);
  for (double& x : v) x = rng.uniform(-1.0, 1.0);
  return v;
}

void bm_matvec_serial(benchmark::State& state) {
  const std::size_t rows = state.range(0), cols = state.range(1);
  const auto w = random_vec(rows * cols, 1);
  const auto x = random_vec(cols, 2);
  std::vector<double> y(rows);
  for (auto _ : state) {
    pc::kernels::matvec_serial(w.data(), rows, cols, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

void bm_matvec_omp(benchmark::State& state) {
  const std::size_t rows = state.range(0), cols = state.range(1);
  const auto w = random_vec(rows * cols, 1);
  const auto x = random_vec(cols, 2);
  std::vector<double> y(rows);
  for (auto _ : state) {
    pc::kernels::matvec_omp(w.data(), rows, cols, x.data(), y.data());
    benchmark::DoNotOptimize(y.data());
  }
}

void bm_matvec_tadd_serial(benchmark::State& state) {
  const std::size_t rows = state.range(0), cols = state.range(1);
  const auto w = random_vec(rows * cols, 3);
  const auto g = random_vec(rows, 4);
  std::vector<double> dx(cols, 0.0);
  for (auto _ : state) {
    pc::kernels::matvec_tadd_serial(w.data(), rows, cols, g.data(), dx.data());
    benchmark::DoNotOptimize(dx.data());
  }
}

void bm_matvec_tadd_omp(benchmark::State& state) {
  const std::size_t rows = state.range(0), cols = state.range(1);
  const auto w = random_vec(rows * cols, 3);
  const auto g = random_vec(rows, 4);
  std::vector<double> dx(cols, 0.0);
  for (auto _ : state) {
    pc::kernels::matvec_tadd_omp(w.data(), rows, cols, g.data(), dx.data());
    benchmark::DoNotOptimize(dx.data());
  }
}

void bm_outer_add_serial(benchmark::State& state) {
  const std::size_t rows = state.range(0), cols = state.range(1);
  std::vector<double> dw(rows * cols, 0.0);
  const auto g = random_vec(rows, 5);
  const auto x = random_vec(cols, 6);
  for (auto _ : state) {
    pc::kernels::outer_add_serial(dw.data(), rows, cols, g.data(), x.data());
    benchmark::DoNotOptimize(dw.data());
  }
}

void bm_outer_add_omp(benchmark::State& state) {
  const std::size_t rows = state.range(0), cols = state.range(1);
  std::vector<double> dw(rows * cols, 0.0);
  const auto g = random_vec(rows, 5);
  const auto x = random_vec(cols, 6);
  for (auto _ : state) {
    pc::kernels::outer_add_omp(dw.data(), rows, cols, g.data(), x.data());
    benchmark::DoNotOptimize(dw.data());
  }
}

void bm_adam_serial(benchmark::State& state) {
  const std::size_t n = state.range(0);
  auto p = random_vec(n, 7);
  const auto g = random_vec(n, 8);
  std::vector<double> m(n, 0.0), v(n, 0.0);
  for (auto _ : state) {
    pc::kernels::adam_update_serial(p.data(), m.data(), v.data(), g.data(), n,
                                    1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001);
    benchmark::DoNotOptimize(p.data());
  }
}

void bm_adam_omp(benchmark::State& state) {
  const std::size_t n = state.range(0);
  auto p = random_vec(n, 7);
  const auto g = random_vec(n, 8);
  std::vector<double> m(n, 0.0), v(n, 0.0);
  for (auto _ : state) {
    pc::kernels::adam_update_omp(p.data(), m.data(), v.data(), g.data(), n,
                                 1e-3, 0.9, 0.999, 1e-8, 0.1, 0.001);
    benchmark::DoNotOptimize(p.data());
  }
}

void matrix_sizes(benchmark::internal::Benchmark* b) {
  b->Args({64, 97})->Args({256, 512})->Args({1024, 2048});
}

BENCHMARK(bm_matvec_serial)->Apply(matrix_sizes);
BENCHMARK(bm_matvec_omp)->Apply(matrix_sizes);
BENCHMARK(bm_matvec_tadd_serial)->Apply(matrix_sizes);
BENCHMARK(bm_matvec_tadd_omp)->Apply(matrix_sizes);
BENCHMARK(bm_outer_add_serial)->Apply(matrix_sizes);
BENCHMARK(bm_outer_add_omp)->Apply(matrix_sizes);
BENCHMARK(bm_adam_serial)->Arg(4096)->Arg(262144);
BENCHMARK(bm_adam_omp)->Arg(4096)->Arg(262144);

}  // namespace

BENCHMARK_MAIN();
