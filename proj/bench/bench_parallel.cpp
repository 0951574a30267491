// Serial vs OpenMP drivers on the three independent-work loops: simulation
// replications, rolling CV windows and indicator tuning cells. Arg 0 is the
// serial path; arg n > 0 runs the parallel path with n threads.

#include <benchmark/benchmark.h>

#include "mfhier/evaluation.hpp"
#include "mfhier/indicator.hpp"

using namespace mfhier;

namespace {

ExecPolicy policy(const benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    return n == 0 ? ExecPolicy::serial() : ExecPolicy{Exec::Parallel, n};
}

void BM_Design1(benchmark::State& state) {
    const SimConfig sim = synthetic_config(small_system_scheme(), 1, 125, 8);
    for (auto _ : state) benchmark::DoNotOptimize(run_design1(sim, {}, policy(state)));
    state.SetItemsProcessed(state.iterations() * sim.reps);
}

void BM_CvWindows(benchmark::State& state) {
    const SimConfig sim = synthetic_config(small_system_scheme(), 2, 125, 1);
    const StackedPanel p = simulate_var(sim, 0);
    const auto s = build_structure(sim.scheme);
    CvConfig cfg;
    cfg.window = 105;
    cfg.exec = policy(state);
    for (auto _ : state) benchmark::DoNotOptimize(cv_rolling(p, s, {}, cfg));
    state.SetItemsProcessed(state.iterations() * (p.rows() - cfg.window));
}

void BM_TuneCells(benchmark::State& state) {
    const SimConfig sim = synthetic_config(small_system_scheme(), 3, 125, 1);
    const auto [p, stats] = standardize(simulate_var(sim, 0), RowRange{0, 125});
    const auto s = build_structure(sim.scheme);
    for (auto _ : state) benchmark::DoNotOptimize(tune_indicator(p, s, {}, {}, 0, 10, 0.01, policy(state)));
    state.SetItemsProcessed(state.iterations() * 100);
}

}  // namespace

BENCHMARK(BM_Design1)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_CvWindows)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_TuneCells)->Arg(0)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
