#include <benchmark/benchmark.h>

#include "wstl/dataset.hpp"
#include "wstl/grad.hpp"
#include "wstl/learn.hpp"
#include "wstl/random.hpp"
#include "wstl/semantics.hpp"

namespace {

using namespace wstl;

// G[0,n-1](a.x <= c) over 5 features, the case-study shape.
Formula always_formula(std::size_t n) {
  return Formula::always({0, n - 1}, std::vector<double>(n, 1.0),
                         Formula::predicate({0.3, -0.2, 0.5, 0.1, -0.4}, 0.25));
}

// Nested formula with shared subterms across time: F[0,w](G[0,w](pred)).
Formula nested_formula(std::size_t w) {
  auto inner = Formula::always({0, w}, std::vector<double>(w + 1, 1.0), Formula::predicate({1.0, -1.0}, 0.1));
  return Formula::eventually({0, w}, std::vector<double>(w + 1, 1.0), std::move(inner));
}

void BM_RobustnessClassical(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Formula phi = always_formula(n);
  Rng rng(1);
  const SignalMatrix s = random_signal(rng, 5, n);
  for (auto _ : state) benchmark::DoNotOptimize(robustness_classical(s, phi));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RobustnessClassical)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_RobustnessWeighted(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Formula phi = always_formula(n);
  Rng rng(1);
  const SignalMatrix s = random_signal(rng, 5, n);
  for (auto _ : state) benchmark::DoNotOptimize(robustness_weighted(s, phi, 0, Sigma(1.0)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_RobustnessWeighted)->RangeMultiplier(4)->Range(4, 256)->Complexity();

void BM_ForwardRecord(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Formula phi = always_formula(n);
  Rng rng(1);
  const SignalMatrix s = random_signal(rng, 5, n);
  for (auto _ : state) benchmark::DoNotOptimize(forward_record(s, phi, 0, Sigma(1.0)).value);
}
BENCHMARK(BM_ForwardRecord)->Arg(16)->Arg(64);

void BM_Backward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Formula phi = always_formula(n);
  Rng rng(1);
  const SignalMatrix s = random_signal(rng, 5, n);
  const auto rec = forward_record(s, phi, 0, Sigma(1.0));
  for (auto _ : state) benchmark::DoNotOptimize(backward(rec.tape));
}
BENCHMARK(BM_Backward)->Arg(16)->Arg(64);

// The memoized tape evaluates each (subformula, time) once; the recursive
// evaluator recomputes the inner Always for every outer time point.
void BM_NestedWeighted(benchmark::State& state) {
  const auto w = static_cast<std::size_t>(state.range(0));
  const Formula phi = nested_formula(w);
  Rng rng(2);
  const SignalMatrix s = random_signal(rng, 2, horizon(phi));
  for (auto _ : state) benchmark::DoNotOptimize(robustness_weighted(s, phi, 0, Sigma(1.0)));
}
BENCHMARK(BM_NestedWeighted)->Arg(4)->Arg(16);

void BM_NestedTape(benchmark::State& state) {
  const auto w = static_cast<std::size_t>(state.range(0));
  const Formula phi = nested_formula(w);
  Rng rng(2);
  const SignalMatrix s = random_signal(rng, 2, horizon(phi));
  for (auto _ : state) {
    const auto rec = forward_record(s, phi, 0, Sigma(1.0));
    benchmark::DoNotOptimize(backward(rec.tape));
  }
}
BENCHMARK(BM_NestedTape)->Arg(4)->Arg(16);

void BM_TrainSynthetic(benchmark::State& state) {
  const DataSplit data = split(synth_generate(50, 8, 0), 0.2, 0);
  const Formula structure = Formula::always({0, 7}, std::vector<double>(8, 1.0), Formula::predicate({0.0, 0.0}, 0.0));
  TrainConfig cfg;
  cfg.epochs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(data, structure, cfg).history.back().loss);
}
BENCHMARK(BM_TrainSynthetic)->Arg(1)->Arg(10)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
