#include <benchmark/benchmark.h>

#include "nblearn/analysis.hpp"
#include "nblearn/graphs.hpp"
#include "nblearn/scenarios.hpp"
#include "nblearn/simulator.hpp"

namespace {

using namespace nblearn;

SimulationConfig cycle_config(int n, UpdateRuleKind rule) {
    const BuiltScenario scenario = build_bernoulli_contrast(n);
    SimulationConfig sim;
    sim.hypotheses = scenario.hypotheses;
    sim.agents = scenario.agents;
    sim.rule = rule;
    if (rule == UpdateRuleKind::AcceleratedGeometric)
        sim.accelerated = AcceleratedOperator::build(scenario.graph, n);
    else
        sim.schedule = GraphSchedule::fixed(scenario.graph);
    sim.horizon = 1;
    sim.seed = 7;
    sim.optimal = scenario.optimal;
    return sim;
}

void bm_step_geometric(benchmark::State& state) {
    const SimulationConfig sim = cycle_config(static_cast<int>(state.range(0)),
                                              UpdateRuleKind::GeometricPool);
    NetworkState st = initial_state(sim);
    for (auto _ : state) {
        step(st, sim, sim.seed);
        benchmark::DoNotOptimize(st.memories.front().current.log_prob(0));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_step_geometric)->Arg(8)->Arg(32)->Arg(128);

void bm_step_accelerated(benchmark::State& state) {
    const SimulationConfig sim = cycle_config(static_cast<int>(state.range(0)),
                                              UpdateRuleKind::AcceleratedGeometric);
    NetworkState st = initial_state(sim);
    for (auto _ : state) {
        step(st, sim, sim.seed);
        benchmark::DoNotOptimize(st.memories.front().current.log_prob(0));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(bm_step_accelerated)->Arg(8)->Arg(32)->Arg(128);

void bm_product_chain(benchmark::State& state) {
    const auto pool = random_window_pool(static_cast<int>(state.range(0)), 2, 3, 11);
    const GraphSchedule schedule = GraphSchedule::cycling(pool, 13);
    for (auto _ : state) {
        ProductChainAccumulator chain(schedule, 0);
        for (long k = 0; k < 64; ++k) chain.advance();
        benchmark::DoNotOptimize(chain.value()(0, 0));
    }
}
BENCHMARK(bm_product_chain)->Arg(8)->Arg(20);

void bm_kl_divergence(benchmark::State& state) {
    const DiscretizationSpec disc{-5.0, 5.0, static_cast<int>(state.range(0))};
    const auto p = discretize_density(disc, [](double x) { return normal_pdf(x, 0.0, 1.0); },
                                      normal_cdf(5.0, 0.0, 1.0) - normal_cdf(-5.0, 0.0, 1.0));
    const auto q = discretize_density(disc, [](double x) { return normal_pdf(x, 0.5, 1.2); },
                                      normal_cdf(5.0, 0.5, 1.2) - normal_cdf(-5.0, 0.5, 1.2));
    for (auto _ : state) {
        benchmark::DoNotOptimize(kl_divergence(p, q));
    }
}
BENCHMARK(bm_kl_divergence)->Arg(64)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
