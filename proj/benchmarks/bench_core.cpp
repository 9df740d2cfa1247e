#include <benchmark/benchmark.h>

#include "dzvoc/cli/scenario.hpp"
#include "dzvoc/integrator.hpp"
#include "dzvoc/stability.hpp"

using namespace dzvoc;

static void bm_oscillator_derivative(benchmark::State& state) {
    const OscillatorParams p;
    const FeedbackGains g;
    OscillatorState s{0.7, 0.01};
    for (auto _ : state) {
        benchmark::DoNotOptimize(s);
        benchmark::DoNotOptimize(oscillator_derivative(s, 3.0, p, g));
    }
}
BENCHMARK(bm_oscillator_derivative);

static void bm_eigenvalues(benchmark::State& state) {
    const OscillatorParams p;
    const FeedbackGains g;
    for (auto _ : state) benchmark::DoNotOptimize(eigenvalues(linearize_segment(p, g, Segment::above), p));
}
BENCHMARK(bm_eigenvalues);

static void bm_grid_rk4_step(benchmark::State& state) {
    const auto config = cli::builtin_scenario("paper-a");
    GridModel grid = cli::build_grid(config);
    std::vector<double> x(grid.layout().size(), 0.0);
    const std::vector<ThreePhase> emf(grid.units.size(), ThreePhase{325.0, -162.5, -162.5});
    const PvDrive pv{};
    Rk4<std::vector<double>> rk4;
    for (auto _ : state) {
        rk4.step(x, 1e-5, [&](const std::vector<double>& s, std::vector<double>& d) {
            d.resize(s.size());
            grid_derivative(grid, s, emf, pv, d);
        });
        benchmark::DoNotOptimize(x.data());
    }
}
BENCHMARK(bm_grid_rk4_step);

static void bm_scenario_second(benchmark::State& state) {
    auto config = cli::builtin_scenario("paper-a");
    config.sim.t_end = 1.0;
    config.events.clear();
    for (auto _ : state) {
        auto r = run_scenario(cli::build_sim_config(config), cli::build_schedule(config), cli::build_grid(config));
        benchmark::DoNotOptimize(r.trace.rows());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<long>(config.sim.t_end / config.sim.dt));
}
BENCHMARK(bm_scenario_second)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
