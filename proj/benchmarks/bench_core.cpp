#include <map>
#include <tuple>

#include <benchmark/benchmark.h>

#include <friedrichs/eigensolver.hpp>
#include <friedrichs/functionals.hpp>
#include <friedrichs/resonant.hpp>
#include <friedrichs/verify.hpp>

using namespace friedrichs;

namespace {

const EigenPair& cached(int n, double p, double q) {
  static std::map<std::tuple<int, double, double>, EigenPair> cache;
  auto key = std::make_tuple(n, p, q);
  auto it = cache.find(key);
  if (it == cache.end()) {
    it = cache.emplace(key, solve_eigenpair(build_grid(GridSpec::interval(0.0, 1.0, n)), Exponents(p, q))).first;
  }
  return it->second;
}

void BM_Eigenpair1D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Exponents e(3.0, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_eigenpair(build_grid(GridSpec::interval(0.0, 1.0, n)), e).lambda1);
  }
}
BENCHMARK(BM_Eigenpair1D)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);

void BM_Eigenpair2D(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Exponents e(3.0, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_eigenpair(build_grid(GridSpec::rectangle(0, 1, 0, 1, n, n)), e).lambda1);
  }
}
BENCHMARK(BM_Eigenpair2D)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_FriedrichsBatch(benchmark::State& state) {
  const Exponents e(3.0, 2.0);
  const EigenPair& pair = cached(128, 3.0, 2.0);
  const Batch batch = make_batch(pair, static_cast<int>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(check_friedrichs(batch, pair, e).min_ratio);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_FriedrichsBatch)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PathFamilies(benchmark::State& state) {
  const Exponents e(3.0, 3.0);
  const EigenPair& pair = cached(128, 3.0, 3.0);
  const GridFunction v = sample_test_function(pair.grid_ptr(), 5, SampleStyle::random_nodal);
  const SPathQuadrature squad(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(P1_family(1.0, v, pair, e, squad));
    benchmark::DoNotOptimize(P0_family(1.0, v, pair, e, squad));
  }
}
BENCHMARK(BM_PathFamilies)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void BM_ResonantSolve(benchmark::State& state) {
  const Exponents e(3.0, 2.0);
  const EigenPair& pair = cached(static_cast<int>(state.range(0)), 3.0, 2.0);
  const GridFunction f = sample_test_function(pair.grid_ptr(), 9, SampleStyle::smooth_mode);
  ResonantConfig cfg;
  cfg.restarts = 1;
  for (auto _ : state) {
    ResonantProblem problem(e, pair, f, cfg);
    benchmark::DoNotOptimize(solve_resonant(problem).energy);
  }
}
BENCHMARK(BM_ResonantSolve)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
