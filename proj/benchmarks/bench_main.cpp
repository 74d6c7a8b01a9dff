#include <benchmark/benchmark.h>

#include <cmath>

#include "fracvar/operators.hpp"
#include "fracvar/solver.hpp"
#include "fracvar/variational.hpp"

using namespace fracvar;

namespace {

SampledFunction smooth(std::size_t n) {
  return SampledFunction::sample(Grid(0, 1, n), [](double x) { return std::exp(x) * std::sin(3 * x); });
}

Problem quadratic(std::size_t n) {
  return Problem{Grid(0, 1, n), FracOrder(0.5), FracOrder(0.5), 0.5, 1,
                 parse("0.5*D[y1]^2 + y1^2", 1, 0), {{0.0}, {EndCondition::fixed(1.0)}}, {}};
}

void BM_CombinedCfd(benchmark::State& st) {
  const auto f = smooth(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(combined_cfd(FracOrder(0.5), FracOrder(0.3), 0.5, f));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_CombinedCfd)->RangeMultiplier(2)->Range(256, 4096)->Complexity();

void BM_Rlfi(benchmark::State& st) {
  const auto f = smooth(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(rlfi(Side::left, FracOrder(0.5), f));
  st.SetComplexityN(st.range(0));
}
BENCHMARK(BM_Rlfi)->RangeMultiplier(2)->Range(256, 4096)->Complexity();

void BM_DiscreteGradient(benchmark::State& st) {
  const Problem p = quadratic(static_cast<std::size_t>(st.range(0)));
  const auto y = initial_trajectory(p);
  for (auto _ : st) benchmark::DoNotOptimize(discrete_gradient(p, y));
}
BENCHMARK(BM_DiscreteGradient)->Arg(201)->Arg(1001);

void BM_Solve(benchmark::State& st) {
  const Problem p = quadratic(static_cast<std::size_t>(st.range(0)));
  for (auto _ : st) benchmark::DoNotOptimize(solve(p));
}
BENCHMARK(BM_Solve)->Arg(101)->Arg(401)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
