// Benchmark target comparing the OpenMP kernels against their serial
// reference implementations: batched rollouts, DP sweeps, and the
// bipartition scan behind the observability margin.

#include <benchmark/benchmark.h>

#include "pomdplab/generator.hpp"
#include "pomdplab/parallel.hpp"
#include "pomdplab/simulator.hpp"
#include "pomdplab/zmdp.hpp"

using namespace pomdplab;

namespace {

PomdpModel bench_model() {
    return extend_with_sinks(generate_model(4, 2, 4, 8, 0.5, GenStructure::NoisyPermutation, 1));
}

TabularZMDP bench_zmdp() {
    const ZSpace zs(3, 4, 3);
    TabularZMDP mdp(zs, 8);
    Stream stream(2);
    for (int h = 1; h <= 7; ++h) {
        for (std::uint64_t z : zs.canonical_states_at_step(h)) {
            if (zs.contains_sink_obs(z)) continue;
            for (int a = 0; a < 3; ++a) {
                std::vector<double> row(5, 0.0);
                double sum = 0.0;
                for (int o = 0; o < 4; ++o) {
                    row[o] = stream.uniform01() + 1e-3;
                    sum += row[o];
                }
                for (int o = 0; o < 4; ++o) row[o] /= sum;
                mdp.set_row(h, z, a, std::move(row));
            }
            if (h >= 2) mdp.set_reward(h, z, stream.uniform01());
        }
    }
    return mdp;
}

void BM_RolloutBatchSerial(benchmark::State& state) {
    const PomdpModel m = bench_model();
    const GeneralPolicy pol = GeneralPolicy::uniform();
    for (auto _ : state) {
        auto batch = rollout_batch_serial(m, pol, 20000, 7, "bench");
        benchmark::DoNotOptimize(batch.data());
    }
}

void BM_RolloutBatchParallel(benchmark::State& state) {
    const PomdpModel m = bench_model();
    const GeneralPolicy pol = GeneralPolicy::uniform();
    set_thread_cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto batch = rollout_batch(m, pol, 20000, 7, "bench");
        benchmark::DoNotOptimize(batch.data());
    }
    set_thread_cap(0);
}

void BM_DpOptimalSerial(benchmark::State& state) {
    const TabularZMDP mdp = bench_zmdp();
    for (auto _ : state) {
        auto res = dp_optimal_serial(mdp);
        benchmark::DoNotOptimize(res.root_value);
    }
}

void BM_DpOptimalParallel(benchmark::State& state) {
    const TabularZMDP mdp = bench_zmdp();
    set_thread_cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto res = dp_optimal(mdp);
        benchmark::DoNotOptimize(res.root_value);
    }
    set_thread_cap(0);
}

void BM_MarginSerial(benchmark::State& state) {
    const PomdpModel m = extend_with_sinks(
        generate_model(9, 2, 9, 3, 0.4, GenStructure::NoisyPermutation, 3));
    for (auto _ : state) {
        auto res = observability_margin_serial(m, 2);
        benchmark::DoNotOptimize(res.gamma);
    }
}

void BM_MarginParallel(benchmark::State& state) {
    const PomdpModel m = extend_with_sinks(
        generate_model(9, 2, 9, 3, 0.4, GenStructure::NoisyPermutation, 3));
    set_thread_cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        auto res = observability_margin(m, 2);
        benchmark::DoNotOptimize(res.gamma);
    }
    set_thread_cap(0);
}

}  // namespace

BENCHMARK(BM_RolloutBatchSerial);
BENCHMARK(BM_RolloutBatchParallel)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(BM_DpOptimalSerial);
BENCHMARK(BM_DpOptimalParallel)->Arg(2)->Arg(4)->Arg(8);
BENCHMARK(BM_MarginSerial);
BENCHMARK(BM_MarginParallel)->Arg(2)->Arg(4)->Arg(8);

BENCHMARK_MAIN();
