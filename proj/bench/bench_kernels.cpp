// Serial reference kernels against their OpenMP counterparts.

#include <benchmark/benchmark.h>

#include <random>

#include "torpsi/quantize.hpp"
#include "torpsi/symbol.hpp"

namespace {

using torpsi::Complex;
using torpsi::GridSpec;

torpsi::ScalarSymbol sample_symbol(const GridSpec& spec) {
  return torpsi::modulated_bracket_symbol(spec, 1.0,
                                          torpsi::Coefficient::parse("const 1; sin 1 0.5", spec.dim()));
}

torpsi::GridFunction random_function(const GridSpec& spec) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd v(spec.grid_size());
  for (auto& x : v) x = Complex(nd(rng), nd(rng));
  return torpsi::GridFunction(spec, 1, v);
}

GridSpec spec_for(const benchmark::State& state) {
  const int dim = static_cast<int>(state.range(0));
  const int g = static_cast<int>(state.range(1));
  return GridSpec(dim, g, g / 2 - 1);
}

void BM_ApplySymbolSerial(benchmark::State& state) {
  const GridSpec spec = spec_for(state);
  const auto a = sample_symbol(spec);
  const auto f = random_function(spec);
  for (auto _ : state) benchmark::DoNotOptimize(torpsi::apply_symbol_serial(a, f));
}

void BM_ApplySymbol(benchmark::State& state) {
  const GridSpec spec = spec_for(state);
  const auto a = sample_symbol(spec);
  const auto f = random_function(spec);
  for (auto _ : state) benchmark::DoNotOptimize(torpsi::apply_symbol(a, f));
}

void BM_MaterializeSerial(benchmark::State& state) {
  const GridSpec spec = spec_for(state);
  const auto a = sample_symbol(spec);
  for (auto _ : state) benchmark::DoNotOptimize(torpsi::materialize_serial(a));
}

void BM_Materialize(benchmark::State& state) {
  const GridSpec spec = spec_for(state);
  const auto a = sample_symbol(spec);
  for (auto _ : state) benchmark::DoNotOptimize(torpsi::materialize(a));
}

void BM_XDerivativeSerial(benchmark::State& state) {
  const GridSpec spec = spec_for(state);
  const auto a = sample_symbol(spec);
  const auto beta = torpsi::make_multi_index(spec.dim() == 1 ? std::initializer_list<int>{1}
                                                             : std::initializer_list<int>{1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(torpsi::x_derivative_serial(a, beta));
}

void BM_XDerivative(benchmark::State& state) {
  const GridSpec spec = spec_for(state);
  const auto a = sample_symbol(spec);
  const auto beta = torpsi::make_multi_index(spec.dim() == 1 ? std::initializer_list<int>{1}
                                                             : std::initializer_list<int>{1, 0});
  for (auto _ : state) benchmark::DoNotOptimize(torpsi::x_derivative(a, beta));
}

}  // namespace

#define GRID_ARGS ->Args({1, 64})->Args({1, 256})->Args({2, 16})->Args({2, 32})

BENCHMARK(BM_ApplySymbolSerial) GRID_ARGS;
BENCHMARK(BM_ApplySymbol) GRID_ARGS;
BENCHMARK(BM_MaterializeSerial)->Args({1, 64})->Args({1, 256})->Args({2, 16});
BENCHMARK(BM_Materialize)->Args({1, 64})->Args({1, 256})->Args({2, 16});
BENCHMARK(BM_XDerivativeSerial)->Args({1, 64})->Args({2, 16});
BENCHMARK(BM_XDerivative)->Args({1, 64})->Args({2, 16});

BENCHMARK_MAIN();
