#include <benchmark/benchmark.h>

#include "carisk/experiments.hpp"
#include "carisk/monte_carlo.hpp"
#include "carisk/oracle.hpp"
#include "carisk/solvers.hpp"

namespace {

using namespace carisk;

const BlockMarket& block() {
    static const BlockMarket b = build_block_market(reference_dataset(2), 0.02, 1);
    return b;
}

const RiskSpec kSpec(0.05, 5.0);

void BM_SolveUnconstrained(benchmark::State& state) {
    const MarketModel market = block().to_market();
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_unconstrained(market, kSpec));
    }
}
BENCHMARK(BM_SolveUnconstrained);

void BM_SolveConstrained(benchmark::State& state) {
    const MarketModel market = block().to_market();
    const ConstraintSpec cs(growth_optimal_benchmark(block()), 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_constrained(market, kSpec, cs));
    }
}
BENCHMARK(BM_SolveConstrained);

void BM_SolvePricingKernel(benchmark::State& state) {
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_pricing_kernel(block(), kSpec, 0.3));
    }
}
BENCHMARK(BM_SolvePricingKernel);

void BM_Oracle(benchmark::State& state) {
    const MarketModel market = block().to_market();
    const ConstraintSpec cs(growth_optimal_benchmark(block()), 0.3);
    OracleConfig config;
    config.parallel = state.range(0) != 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(numeric_min_car(market, kSpec, cs, config));
    }
}
BENCHMARK(BM_Oracle)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_TerminalSamples(benchmark::State& state) {
    const MarketModel market = block().to_market();
    const Vector pi = solve_unconstrained(market, kSpec).pi;
    McConfig config;
    config.paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(mc_terminal_samples(market, pi, kSpec, 1.0, config));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TerminalSamples)->Arg(100'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

void BM_VarianceSweep(benchmark::State& state) {
    const ExperimentConfig config;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_variance_sweep(config));
    }
}
BENCHMARK(BM_VarianceSweep)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
