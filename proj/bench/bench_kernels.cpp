// Serial vs OpenMP kernels on the desk-scale configuration.

#include <benchmark/benchmark.h>

#include "qpower/kernels.hpp"
#include "qpower/runner.hpp"

namespace {

qpower::SimConfig desk_config(std::size_t cardinality) {
    return qpower::config_from_json({
        {"m_antennas", 8},
        {"k_users", 4},
        {"level_count", 3},
        {"p_per_max_db", 30.0},
        {"p_total_db", 28.0},
        {"sinr_target_db", 20.0},
        {"noise_var", 1.0},
        {"channel_cardinality", cardinality},
        {"seed", 7},
    });
}

const qpower::Experiment& experiment() {
    static const qpower::Experiment ex = qpower::build_experiment(desk_config(16));
    return ex;
}

void BM_RewardTableSerial(benchmark::State& state) {
    const auto& ex = experiment();
    for (auto _ : state)
        benchmark::DoNotOptimize(qpower::kernels::reward_table_serial(
            ex.states, ex.actions, qpower::PrecoderKind::ZF, ex.reward));
}

void BM_RewardTableParallel(benchmark::State& state) {
    const auto& ex = experiment();
    for (auto _ : state)
        benchmark::DoNotOptimize(qpower::kernels::reward_table_parallel(
            ex.states, ex.actions, qpower::PrecoderKind::ZF, ex.reward));
}

struct SweepFixture {
    qpower::TransitionMatrix transitions;
    qpower::RewardTable rewards;
    std::vector<double> q_in;
    std::vector<double> q_out;
};

SweepFixture make_sweep(std::size_t states, std::size_t actions) {
    qpower::Rng rng(11);
    qpower::RewardTable r{states, actions, std::vector<double>(states * actions)};
    for (auto& x : r.values) x = rng.uniform();
    std::vector<double> q(r.values.size());
    for (auto& x : q) x = rng.uniform();
    return {qpower::generate_transition_matrix(states, 0.5, 3), std::move(r), q,
            std::vector<double>(q.size())};
}

void BM_BellmanSweepSerial(benchmark::State& state) {
    auto f = make_sweep(static_cast<std::size_t>(state.range(0)), 4000);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            qpower::kernels::bellman_sweep_serial(f.transitions, f.rewards, 0.9, f.q_in, f.q_out));
}

void BM_BellmanSweepParallel(benchmark::State& state) {
    auto f = make_sweep(static_cast<std::size_t>(state.range(0)), 4000);
    for (auto _ : state)
        benchmark::DoNotOptimize(qpower::kernels::bellman_sweep_parallel(f.transitions, f.rewards,
                                                                         0.9, f.q_in, f.q_out));
}

}  // namespace

BENCHMARK(BM_RewardTableSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RewardTableParallel)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BellmanSweepSerial)->Arg(16)->Arg(128)->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_BellmanSweepParallel)->Arg(16)->Arg(128)->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
