#include <random>

#include <benchmark/benchmark.h>

#include "addgp/kernels.hpp"
#include "addgp/linalg.hpp"

namespace {

addgp::Matrix random_inputs(std::size_t n, std::size_t p) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  addgp::Matrix x(n, p);
  for (double& v : x.values()) v = u(rng);
  return x;
}

addgp::Matrix spd(std::size_t n) {
  const auto x = random_inputs(n, 4);
  auto k = addgp::gram_symmetric(addgp::KernelParams{addgp::SEParams{0.0, 0.0}}, x);
  for (std::size_t i = 0; i < n; ++i) k(i, i) += 1.0;
  return k;
}

const addgp::AdditiveKernelParams kAdditive = addgp::AdditiveKernelParams::uniform(30);

void BM_GramParallel(benchmark::State& state) {
  const auto x = random_inputs(static_cast<std::size_t>(state.range(0)), 30);
  for (auto _ : state) benchmark::DoNotOptimize(addgp::gram_symmetric(addgp::KernelParams{kAdditive}, x));
}

void BM_GramSerial(benchmark::State& state) {
  const auto x = random_inputs(static_cast<std::size_t>(state.range(0)), 30);
  auto k = [](std::span<const double> a, std::span<const double> b) {
    return addgp::additive_eval(kAdditive, a, b);
  };
  for (auto _ : state) benchmark::DoNotOptimize(addgp::reference::gram(k, x, x));
}

void BM_CholeskyParallel(benchmark::State& state) {
  const auto m = spd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(addgp::cholesky(m));
}

void BM_CholeskySerial(benchmark::State& state) {
  const auto m = spd(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(addgp::reference::cholesky(m));
}

}  // namespace

BENCHMARK(BM_GramParallel)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_GramSerial)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CholeskyParallel)->Arg(256)->Arg(1024)->Arg(1800)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CholeskySerial)->Arg(256)->Arg(1024)->Arg(1800)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
