#include "bsde/solver.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>

#include "bsde/errors.hpp"
#include "bsde/parallel.hpp"

namespace bsde {

std::size_t minimal_steps_for(double horizon, double lipschitz) {
    return static_cast<std::size_t>(std::floor(horizon * lipschitz)) + 1;
}

SolutionEstimate solve_lipschitz_bsde(const GeneratorSpec& gen, const TerminalSpec& terminal,
                                      const BrownianBatch& batch, const RegressionBasis& basis,
                                      const PicardConfig& picard, unsigned threads,
                                      double lipschitz_override) {
    double lipschitz = lipschitz_override;
    if (lipschitz < 0.0) {
        if (!gen.lipschitz_const)
            throw ConfigError("solve_lipschitz_bsde requires gen.lipschitz_const or an "
                              "explicit Lipschitz bound");
        lipschitz = *gen.lipschitz_const;
    }
    if (!(picard.tol > 0.0)) throw ConfigError("picard.tol must be positive");
    if (picard.max_iter == 0) throw ConfigError("picard.max_iter must be >= 1");

    const TimeGrid& grid = batch.grid();
    const std::size_t n_steps = grid.steps;
    const std::size_t n_paths = batch.paths();
    const std::size_t d = batch.dimension();
    const double dt = grid.dt();
    if (dt * lipschitz >= 1.0)
        throw NumericError("contraction guard failed: dt * L = " + std::to_string(dt * lipschitz) +
                           " >= 1; increase N to at least " +
                           std::to_string(minimal_steps_for(grid.horizon, lipschitz)));

    SolutionEstimate sol;
    sol.grid = grid;
    sol.batch_id = batch.id();
    sol.dimension = d;
    sol.paths = n_paths;
    sol.basis = basis;
    sol.generator_id = gen.name;
    sol.y.assign(n_paths * (n_steps + 1), 0.0);
    sol.z.assign(n_paths * n_steps * d, 0.0);
    sol.f_vals.assign(n_paths * n_steps, 0.0);
    sol.picard.assign(n_steps, PicardStepStats{});

    // Path levels once, forward-accumulated in step order (consistent with
    // path_value): levels[(m * (N+1) + i) * d + k].
    std::vector<double> levels(n_paths * (n_steps + 1) * d, 0.0);
    parallel_for(n_paths, threads, [&](std::size_t m) {
        double* row = levels.data() + m * (n_steps + 1) * d;
        for (std::size_t i = 0; i < n_steps; ++i) {
            std::span<const double> inc = batch.increment(m, i);
            for (std::size_t k = 0; k < d; ++k) row[(i + 1) * d + k] = row[i * d + k] + inc[k];
        }
    });

    // Terminal layer Y_N = xi, exactly.
    parallel_for(n_paths, threads, [&](std::size_t m) {
        std::span<const double> terminal_state{levels.data() + (m * (n_steps + 1) + n_steps) * d, d};
        sol.y_at(m, n_steps) = terminal({terminal_state, &batch, m});
    });

    std::vector<double> states(n_paths * d);
    std::vector<double> next_y(n_paths);
    std::vector<double> targets(n_paths);

    for (std::size_t i = n_steps; i-- > 0;) {
        const double t_i = grid.node(i);
        for (std::size_t m = 0; m < n_paths; ++m) {
            next_y[m] = sol.y_at(m, i + 1);
            for (std::size_t k = 0; k < d; ++k)
                states[m * d + k] = levels[(m * (n_steps + 1) + i) * d + k];
        }

        RegressionPlan plan(states, d, basis, threads);
        RegressionFit cond_mean = plan.project(next_y);

        // Z: centered martingale-increment target per coordinate, then Y.
        for (std::size_t k = 0; k < d; ++k) {
            for (std::size_t m = 0; m < n_paths; ++m)
                targets[m] = (next_y[m] - cond_mean.fitted[m]) * batch.increment(m, i)[k] / dt;
            RegressionFit zfit = plan.project(targets);
            for (std::size_t m = 0; m < n_paths; ++m)
                sol.z[(m * n_steps + i) * d + k] = zfit.fitted[m];
        }

        std::atomic<std::size_t> diverged{static_cast<std::size_t>(-1)};
        const std::size_t n_blocks = block_count_for(n_paths);
        std::vector<std::size_t> block_max_iter(n_blocks, 0);
        std::vector<std::size_t> block_sum_iter(n_blocks, 0);
        std::vector<double> block_max_inc(n_blocks, 0.0);
        for_each_block(n_paths, threads, [&](std::size_t b, BlockRange r) {
            for (std::size_t m = r.begin; m < r.end; ++m) {
                std::span<const double> state{states.data() + m * d, d};
                std::span<const double> z_here = sol.z_at(m, i);
                const double base_value = cond_mean.fitted[m];
                double y_prev = base_value;
                double f_prev = 0.0;
                bool converged = false;
                std::size_t iters = 0;
                double increment = 0.0;
                while (iters < picard.max_iter) {
                    f_prev = gen(t_i, state, y_prev, z_here);
                    const double y_next = base_value + dt * f_prev;
                    ++iters;
                    increment = std::fabs(y_next - y_prev);
                    y_prev = y_next;
                    if (increment <= picard.tol) {
                        converged = true;
                        break;
                    }
                }
                if (!converged) {
                    std::size_t expect = static_cast<std::size_t>(-1);
                    diverged.compare_exchange_strong(expect, i);
                    return;
                }
                sol.y_at(m, i) = y_prev;
                sol.f_vals[m * n_steps + i] = f_prev;
                block_max_iter[b] = std::max(block_max_iter[b], iters);
                block_sum_iter[b] += iters;
                block_max_inc[b] = std::max(block_max_inc[b], increment);
            }
        });
        if (diverged.load() != static_cast<std::size_t>(-1))
            throw NumericError("Picard iteration did not converge within " +
                               std::to_string(picard.max_iter) + " iterations at step " +
                               std::to_string(i) + "; tighten dt or raise max_iter");

        PicardStepStats& stats = sol.picard[i];
        std::size_t total_iters = 0;
        for (std::size_t b = 0; b < n_blocks; ++b) {
            stats.max_iterations = std::max(stats.max_iterations, block_max_iter[b]);
            stats.max_final_increment = std::max(stats.max_final_increment, block_max_inc[b]);
            total_iters += block_sum_iter[b];
        }
        stats.mean_iterations = static_cast<double>(total_iters) / static_cast<double>(n_paths);
    }

    double y0_min = sol.y_at(0, 0), y0_max = sol.y_at(0, 0), y0_sum = 0.0;
    for (std::size_t m = 0; m < n_paths; ++m) {
        const double v = sol.y_at(m, 0);
        y0_min = std::min(y0_min, v);
        y0_max = std::max(y0_max, v);
        y0_sum += v;
    }
    sol.y0_mean = y0_sum / static_cast<double>(n_paths);
    sol.y0_spread = y0_max - y0_min;

    for (double v : sol.y)
        if (!std::isfinite(v)) throw NumericError("solver produced a non-finite Y value");
    for (double v : sol.z)
        if (!std::isfinite(v)) throw NumericError("solver produced a non-finite Z value");
    return sol;
}

GeneratorSpec make_dominating_generator(GeneratorSpec::Bound g, double growth_K) {
    GeneratorSpec spec;
    spec.name = "dominating";
    spec.growth_K = growth_K;
    spec.bound_g = g;
    spec.lipschitz_const = growth_K;
    spec.depends_on_y = growth_K > 0.0;
    spec.depends_on_z = growth_K > 0.0;
    const double k = growth_K;
    spec.eval = [g = std::move(g), k](double t, std::span<const double> state, double y,
                                      std::span<const double> z) {
        return g(t, state) + k * (std::fabs(y) + znorm(z));
    };
    return spec;
}

} // namespace bsde
