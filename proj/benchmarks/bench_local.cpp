#include <cmath>

#include <benchmark/benchmark.h>

#include "dpgcd/bench.hpp"

using namespace dpgcd;

namespace {

const Physics kPhys{1e-4, {std::sqrt(0.5), std::sqrt(0.5)}};

Element unit_element(double h) {
  Element e;
  e.hx = h;
  e.hy = h;
  return e;
}

void BM_Gram(benchmark::State& state) {
  const int pt = static_cast<int>(state.range(0));
  const EnrichedTestSpace s(build_shishkin(kPhys.eps, 0.1, pt), pt);
  const NormSpec n = NormSpec::quasi_optimal_default(kPhys.eps);
  for (auto _ : state) {
    benchmark::DoNotOptimize(assemble_gram(s, n, unit_element(0.1), kPhys));
  }
  state.counters["dim"] = s.dimension();
}
BENCHMARK(BM_Gram)->DenseRange(2, 8, 2)->Unit(benchmark::kMillisecond);

void BM_LocalSolve(benchmark::State& state) {
  const int p = static_cast<int>(state.range(0));
  const int pt = p + 2;
  const EnrichedTestSpace s(build_shishkin(kPhys.eps, 0.1, pt), pt);
  const NormSpec n = NormSpec::quasi_optimal_default(kPhys.eps);
  const LocalLayout layout{p};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_local(s, n, unit_element(0.1), layout, kPhys, {}));
  }
}
BENCHMARK(BM_LocalSolve)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_GlobalSolve(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto prob = make_problem(ProblemKind::skew_continuous, 1e-2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_benchmark(prob, NormChoice{}, n, 1, 2));
  }
}
BENCHMARK(BM_GlobalSolve)->Arg(10)->Arg(25)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
