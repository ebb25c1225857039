// Serial reference kernels against their OpenMP versions.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "symparam/kernels.hpp"
#include "symparam/toy.hpp"

using namespace symparam;

namespace {

std::vector<double> random_vector(std::size_t n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = dist(rng);
  return v;
}

template <auto Kernel>
void BM_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1), b = random_vector(n * n, 2);
  std::vector<double> c(n * n);
  for (auto _ : state) {
    Kernel(a, b, c, n, n, n);
    benchmark::DoNotOptimize(c.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

template <auto Kernel>
void BM_matmul_at_b(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto a = random_vector(n * n, 1), g = random_vector(n * n, 2);
  std::vector<double> out(n * n);
  for (auto _ : state) {
    Kernel(a, g, out, n, n, n);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n * n));
}

template <auto Kernel>
void BM_landscape(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto xs = toy::linspace(-1, 1, n), ys = toy::linspace(0, 1, n);
  std::vector<double> reg(n), cls(n);
  for (std::size_t i = 0; i < n; ++i) {
    reg[i] = toy::g(xs[i]);
    cls[i] = toy::label(xs[i]);
  }
  const kernels::LandscapeTerms terms{reg, cls, 0.5, 0.5, toy::kClassificationScale, toy::kDefaultClampEps};
  std::vector<double> out(n * n);
  for (auto _ : state) {
    Kernel(terms, ys, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n * n));
}

}  // namespace

BENCHMARK(BM_matmul<kernels::serial::matmul>)->Name("matmul/serial")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_matmul<kernels::omp::matmul>)->Name("matmul/omp")->Arg(64)->Arg(128)->Arg(256);
BENCHMARK(BM_matmul_at_b<kernels::serial::matmul_at_b_acc>)->Name("matmul_at_b/serial")->Arg(128)->Arg(256);
BENCHMARK(BM_matmul_at_b<kernels::omp::matmul_at_b_acc>)->Name("matmul_at_b/omp")->Arg(128)->Arg(256);
BENCHMARK(BM_landscape<kernels::serial::landscape>)->Name("landscape/serial")->Arg(201)->Arg(801);
BENCHMARK(BM_landscape<kernels::omp::landscape>)->Name("landscape/omp")->Arg(201)->Arg(801);

BENCHMARK_MAIN();
