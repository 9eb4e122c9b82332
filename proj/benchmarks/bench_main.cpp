#include <benchmark/benchmark.h>

#include "bsde/brownian.hpp"
#include "bsde/diagnostics.hpp"
#include "bsde/infconv.hpp"
#include "bsde/solver.hpp"

namespace {

void BM_SimulatePaths(benchmark::State& state) {
    const bsde::TimeGrid grid = bsde::make_grid(1.0, 64);
    const std::size_t paths = static_cast<std::size_t>(state.range(0));
    for (auto _ : state) {
        bsde::BrownianBatch batch = bsde::simulate_paths(grid, 1, paths, 7, 1);
        benchmark::DoNotOptimize(batch.raw_increments().data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(paths * grid.steps));
}
BENCHMARK(BM_SimulatePaths)->Arg(1 << 10)->Arg(1 << 14);

void BM_InfConvolve(benchmark::State& state) {
    bsde::GeneratorSpec sq = bsde::make_builtin_generator("sqrt_y", {});
    bsde::ApproxFamily family = bsde::make_approx_family(
        sq, 4.0, {static_cast<std::size_t>(state.range(0)),
                  static_cast<std::size_t>(state.range(1))});
    const std::vector<double> zero{0.0};
    double y = 0.0;
    for (auto _ : state) {
        y += 1e-4;
        benchmark::DoNotOptimize(bsde::inf_convolve(family, 0.0, zero, y, zero).value);
    }
}
BENCHMARK(BM_InfConvolve)->Args({21, 8})->Args({33, 4})->Args({65, 12});

void BM_RegressionStep(benchmark::State& state) {
    const std::size_t paths = static_cast<std::size_t>(state.range(0));
    const bsde::TimeGrid grid = bsde::make_grid(1.0, 2);
    bsde::BrownianBatch batch = bsde::simulate_paths(grid, 1, paths, 5, 1);
    std::vector<double> states(paths), targets(paths);
    for (std::size_t m = 0; m < paths; ++m) {
        states[m] = batch.increment(m, 0)[0];
        targets[m] = batch.increment(m, 1)[0] + states[m];
    }
    const bsde::RegressionBasis basis{3, 1e-8, true};
    for (auto _ : state) {
        bsde::RegressionFit fit = bsde::condexp_regress(targets, states, 1, basis, 1);
        benchmark::DoNotOptimize(fit.fitted.data());
    }
    state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(paths));
}
BENCHMARK(BM_RegressionStep)->Arg(1 << 12)->Arg(1 << 15);

void BM_LipschitzSolve(benchmark::State& state) {
    const bsde::TimeGrid grid = bsde::make_grid(1.0, 32);
    bsde::BrownianBatch batch = bsde::simulate_paths(grid, 1, 4000, 11, 1);
    std::vector<double> b{0.5};
    const bsde::GeneratorSpec gen = bsde::make_builtin_generator("linear_z", b);
    const bsde::TerminalSpec terminal = bsde::make_terminal("w_T", {});
    const bsde::RegressionBasis basis{3, 1e-8, true};
    for (auto _ : state) {
        bsde::SolutionEstimate sol =
            bsde::solve_lipschitz_bsde(gen, terminal, batch, basis, bsde::PicardConfig{}, 1);
        benchmark::DoNotOptimize(sol.y.data());
    }
}
BENCHMARK(BM_LipschitzSolve);

void BM_SpNorm(benchmark::State& state) {
    const bsde::TimeGrid grid = bsde::make_grid(1.0, 64);
    bsde::BrownianBatch batch = bsde::simulate_paths(grid, 1, 20000, 13, 1);
    bsde::SolutionEstimate sol;
    sol.grid = grid;
    sol.batch_id = batch.id();
    sol.dimension = 1;
    sol.paths = batch.paths();
    sol.y.resize(batch.paths() * (grid.steps + 1));
    sol.z.assign(batch.paths() * grid.steps, 1.0);
    for (std::size_t m = 0; m < batch.paths(); ++m) {
        std::vector<double> levels = batch.path_levels(m);
        for (std::size_t i = 0; i <= grid.steps; ++i) sol.y_at(m, i) = levels[i];
    }
    for (auto _ : state) benchmark::DoNotOptimize(bsde::sp_norm(sol, 3.0).value);
}
BENCHMARK(BM_SpNorm);

} // namespace

BENCHMARK_MAIN();
