#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "bsde/errors.hpp"
#include "bsde/solver.hpp"
#include "oracles.hpp"

using namespace bsde;

namespace {

struct OracleProblem {
    GeneratorSpec gen;
    std::function<double(double t, double w)> exact_y;
    std::function<double(double t)> exact_z;
};

OracleProblem zero_problem() {
    return {make_builtin_generator("zero", {}),
            [](double t, double w) { return oracles::exact_y_zero(t, w); },
            [](double t) { return oracles::exact_z_zero(t); }};
}

OracleProblem linear_z_problem(double b, double horizon) {
    std::vector<double> params{b};
    return {make_builtin_generator("linear_z", params),
            [=](double t, double w) { return oracles::exact_y_linear_z(b, horizon, t, w); },
            [](double t) { return oracles::exact_z_linear_z(t); }};
}

OracleProblem linear_y_problem(double a, double horizon) {
    std::vector<double> params{a};
    return {make_builtin_generator("linear_y", params),
            [=](double t, double w) { return oracles::exact_y_linear_y(a, horizon, t, w); },
            [=](double t) { return oracles::exact_z_linear_y(a, horizon, t); }};
}

struct OracleErrors {
    double max_rms_y = 0.0;
    double h2_rel_z = 0.0;
    double y0_spread = 0.0;
    double y0_mean = 0.0;
    double z0_mean = 0.0;
};

OracleErrors measure(const OracleProblem& problem, const BrownianBatch& batch,
                     const SolutionEstimate& sol) {
    OracleErrors err;
    const std::size_t n = sol.grid.steps;
    const double dt = sol.grid.dt();
    double z_err_sq = 0.0, z_norm_sq = 0.0, z0_sum = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        double sq_sum = 0.0;
        for (std::size_t m = 0; m < sol.paths; ++m) {
            const double w = batch.level(m, i)[0];
            const double diff = sol.y_at(m, i) - problem.exact_y(sol.grid.node(i), w);
            sq_sum += diff * diff;
        }
        err.max_rms_y =
            std::max(err.max_rms_y, std::sqrt(sq_sum / static_cast<double>(sol.paths)));
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double exact = problem.exact_z(sol.grid.node(i));
        double sq_sum = 0.0;
        for (std::size_t m = 0; m < sol.paths; ++m) {
            const double diff = sol.z_at(m, i)[0] - exact;
            sq_sum += diff * diff;
        }
        z_err_sq += dt * sq_sum / static_cast<double>(sol.paths);
        z_norm_sq += dt * exact * exact;
    }
    for (std::size_t m = 0; m < sol.paths; ++m) z0_sum += sol.z_at(m, 0)[0];
    err.h2_rel_z = std::sqrt(z_err_sq / z_norm_sq);
    err.y0_spread = sol.y0_spread;
    err.y0_mean = sol.y0_mean;
    err.z0_mean = z0_sum / static_cast<double>(sol.paths);
    return err;
}

const TerminalSpec kTerminalW = make_terminal("w_T", {});

} // namespace

TEST_CASE("closed-form oracles at unit-test scale") {
    TimeGrid grid = make_grid(1.0, 32);
    BrownianBatch batch = simulate_paths(grid, 1, 8000, 2024);
    RegressionBasis basis{3, 1e-8, true};
    PicardConfig picard;

    SUBCASE("f == 0, xi = W_T: Y is the Brownian path, Z is 1") {
        OracleProblem problem = zero_problem();
        SolutionEstimate sol =
            solve_lipschitz_bsde(problem.gen, kTerminalW, batch, basis, picard);
        OracleErrors err = measure(problem, batch, sol);
        CHECK(err.max_rms_y <= 0.05);
        CHECK(err.h2_rel_z <= 0.08);
        CHECK(err.y0_spread <= 0.02);
    }
    SUBCASE("f = 0.5 z, xi = W_T: Y_t = W_t + 0.5 (T - t)") {
        OracleProblem problem = linear_z_problem(0.5, grid.horizon);
        SolutionEstimate sol =
            solve_lipschitz_bsde(problem.gen, kTerminalW, batch, basis, picard);
        OracleErrors err = measure(problem, batch, sol);
        CHECK(err.max_rms_y <= 0.05);
        CHECK(err.h2_rel_z <= 0.08);
        CHECK(err.y0_spread <= 0.02);
        CHECK(err.y0_mean == doctest::Approx(0.5).epsilon(0.05));
    }
    SUBCASE("f = 0.5 y, xi = W_T: Y_t = e^{0.5 (T-t)} W_t") {
        OracleProblem problem = linear_y_problem(0.5, grid.horizon);
        SolutionEstimate sol =
            solve_lipschitz_bsde(problem.gen, kTerminalW, batch, basis, picard);
        OracleErrors err = measure(problem, batch, sol);
        CHECK(err.max_rms_y <= 0.05);
        CHECK(err.h2_rel_z <= 0.08);
        CHECK(err.y0_spread <= 0.02);
        CHECK(std::fabs(err.y0_mean) <= 0.02);
        // The one-step scheme reads Z off the right endpoint: the discrete
        // target is (1 - a dt)^{-(N-1)}; at this M the estimator noise is a
        // few percent on top.
        const double discrete_z0 = std::pow(1.0 - 0.5 / 32.0, -31.0);
        CHECK(err.z0_mean == doctest::Approx(discrete_z0).epsilon(0.07));
    }
}

TEST_CASE("errors shrink when N and M are refined together") {
    OracleProblem problem = linear_z_problem(0.5, 1.0);
    RegressionBasis basis{3, 1e-8, true};
    PicardConfig picard;

    TimeGrid coarse_grid = make_grid(1.0, 16);
    BrownianBatch coarse_batch = simulate_paths(coarse_grid, 1, 2500, 7070);
    OracleErrors coarse = measure(problem, coarse_batch,
                                  solve_lipschitz_bsde(problem.gen, kTerminalW, coarse_batch,
                                                       basis, picard));

    TimeGrid fine_grid = make_grid(1.0, 32);
    BrownianBatch fine_batch = simulate_paths(fine_grid, 1, 10000, 7070);
    OracleErrors fine = measure(problem, fine_batch,
                                solve_lipschitz_bsde(problem.gen, kTerminalW, fine_batch,
                                                     basis, picard));
    CHECK(fine.max_rms_y < coarse.max_rms_y);
    CHECK(fine.h2_rel_z < coarse.h2_rel_z);
}

TEST_CASE("terminal layer equals xi bit-exactly") {
    TimeGrid grid = make_grid(1.0, 8);
    BrownianBatch batch = simulate_paths(grid, 1, 500, 3);
    TerminalSpec awt = make_terminal("abs_w_T", {});
    SolutionEstimate sol = solve_lipschitz_bsde(make_builtin_generator("zero", {}), awt, batch,
                                                RegressionBasis{2, 1e-8, true}, PicardConfig{});
    for (std::size_t m = 0; m < 500; ++m) {
        std::vector<double> terminal_state = batch.level(m, 8);
        CHECK(sol.y_at(m, 8) == std::fabs(terminal_state[0]));
    }
}

TEST_CASE("contraction guard rejects dt * L >= 1 and names the minimal N") {
    TimeGrid grid = make_grid(1.0, 32);
    BrownianBatch batch = simulate_paths(grid, 1, 200, 4);
    std::vector<double> a{40.0};
    GeneratorSpec gen = make_builtin_generator("linear_y", a); // dt * L = 1.25
    CHECK_THROWS_WITH_AS(solve_lipschitz_bsde(gen, kTerminalW, batch,
                                              RegressionBasis{1, 1e-8, true}, PicardConfig{}),
                         doctest::Contains("41"), NumericError);
    CHECK(minimal_steps_for(1.0, 40.0) == 41);
}

TEST_CASE("Picard divergence reports the step index") {
    TimeGrid grid = make_grid(1.0, 4);
    BrownianBatch batch = simulate_paths(grid, 1, 50, 5);
    std::vector<double> c{5.0};
    GeneratorSpec gen = make_builtin_generator("constant", c);
    PicardConfig strict{1e-12, 1};
    CHECK_THROWS_WITH_AS(solve_lipschitz_bsde(gen, kTerminalW, batch,
                                              RegressionBasis{1, 1e-8, true}, strict),
                         doctest::Contains("step 3"), NumericError);
}

TEST_CASE("missing Lipschitz constant is rejected unless overridden") {
    TimeGrid grid = make_grid(1.0, 16);
    BrownianBatch batch = simulate_paths(grid, 1, 300, 6);
    GeneratorSpec sq = make_builtin_generator("sqrt_y", {});
    CHECK_THROWS_AS(solve_lipschitz_bsde(sq, kTerminalW, batch, RegressionBasis{2, 1e-8, true},
                                         PicardConfig{}),
                    ConfigError);

    // An unlabeled but genuinely Lipschitz driver runs once a bound is supplied.
    GeneratorSpec unlabeled;
    unlabeled.name = "sin_y";
    unlabeled.eval = [](double, std::span<const double>, double y, std::span<const double>) {
        return 0.3 * std::sin(y);
    };
    unlabeled.growth_K = 0.3;
    unlabeled.bound_g = [](double, std::span<const double>) { return 0.3; };
    unlabeled.depends_on_y = true;
    unlabeled.depends_on_z = false;
    CHECK_THROWS_AS(solve_lipschitz_bsde(unlabeled, kTerminalW, batch,
                                         RegressionBasis{2, 1e-8, true}, PicardConfig{}),
                    ConfigError);
    SolutionEstimate sol =
        solve_lipschitz_bsde(unlabeled, kTerminalW, batch, RegressionBasis{2, 1e-8, true},
                             PicardConfig{}, 0, 0.3);
    CHECK(sol.paths == 300);
    CHECK(sol.generator_id == "sin_y");
}

TEST_CASE("dominating generator values and metadata") {
    GeneratorSpec dom0 = make_dominating_generator(
        [](double, std::span<const double>) { return 0.0; }, 0.0);
    std::vector<double> state{0.0};
    std::vector<double> z0{0.0};
    CHECK(dom0(0.0, state, 7.0, z0) == 0.0);
    CHECK(dom0.lipschitz_const.value() == 0.0);

    GeneratorSpec dom = make_dominating_generator(
        [](double, std::span<const double>) { return 1.0; }, 1.0);
    CHECK(dom(0.0, state, 0.0, z0) == 1.0);
    std::vector<double> z3{3.0};
    CHECK(dom(0.0, state, -2.0, z3) == 6.0);
    CHECK(dom.lipschitz_const.value() == 1.0);
}

TEST_CASE("ordered problems keep their order on the solved paths") {
    TimeGrid grid = make_grid(1.0, 32);
    BrownianBatch batch = simulate_paths(grid, 1, 4000, 99);
    RegressionBasis basis{3, 1e-8, true};
    std::vector<double> half{0.5};
    // f1 = 0.5 >= f2 = 0 and the same terminal: Y1 >= Y2 except at t = T.
    SolutionEstimate upper = solve_lipschitz_bsde(make_builtin_generator("constant", half),
                                                  kTerminalW, batch, basis, PicardConfig{});
    SolutionEstimate lower = solve_lipschitz_bsde(make_builtin_generator("zero", {}),
                                                  kTerminalW, batch, basis, PicardConfig{});
    std::size_t violations = 0;
    for (std::size_t m = 0; m < 4000; ++m)
        for (std::size_t i = 0; i <= 32; ++i)
            if (upper.y_at(m, i) < lower.y_at(m, i) - 1e-2) ++violations;
    CHECK(static_cast<double>(violations) / (4000.0 * 33.0) < 0.01);
}

TEST_CASE("solver output is bit-identical across thread counts") {
    TimeGrid grid = make_grid(1.0, 16);
    BrownianBatch batch = simulate_paths(grid, 1, 2000, 1212);
    std::vector<double> params{0.5};
    GeneratorSpec gen = make_builtin_generator("linear_z", params);
    RegressionBasis basis{3, 1e-8, true};
    SolutionEstimate a = solve_lipschitz_bsde(gen, kTerminalW, batch, basis, PicardConfig{}, 1);
    SolutionEstimate b = solve_lipschitz_bsde(gen, kTerminalW, batch, basis, PicardConfig{}, 8);
    CHECK(a.y == b.y);
    CHECK(a.z == b.z);
    CHECK(a.f_vals == b.f_vals);
}

TEST_CASE("a path-dependent terminal reaches the solver through the full-path hook") {
    TimeGrid grid = make_grid(1.0, 8);
    BrownianBatch batch = simulate_paths(grid, 1, 200, 77);
    TerminalSpec running_max;
    running_max.name = "running_max";
    running_max.phi = [](const TerminalSpec::Args& args) {
        double best = 0.0;
        for (std::size_t i = 0; i <= args.batch->grid().steps; ++i)
            best = std::max(best, args.batch->level(args.path_index, i)[0]);
        return best;
    };
    SolutionEstimate sol =
        solve_lipschitz_bsde(make_builtin_generator("zero", {}), running_max, batch,
                             RegressionBasis{2, 1e-8, true}, PicardConfig{});
    for (std::size_t m = 0; m < 200; ++m) {
        double best = 0.0;
        for (std::size_t i = 0; i <= 8; ++i) best = std::max(best, batch.level(m, i)[0]);
        CHECK(sol.y_at(m, 8) == best);
    }
}

TEST_CASE("a two-dimensional driver produces the split Z components") {
    // f = 0.5 z_1 with xi = W_T^(1) at d = 2: Y = W^(1) + 0.5 (T - t), Z = (1, 0).
    TimeGrid grid = make_grid(1.0, 16);
    BrownianBatch batch = simulate_paths(grid, 2, 8000, 909);
    std::vector<double> half{0.5};
    SolutionEstimate sol =
        solve_lipschitz_bsde(make_builtin_generator("linear_z", half), kTerminalW, batch,
                             RegressionBasis{2, 1e-8, true}, PicardConfig{});
    double z1_err = 0.0, z2_err = 0.0, y_err = 0.0;
    for (std::size_t m = 0; m < sol.paths; ++m) {
        for (std::size_t i = 0; i < 16; ++i) {
            std::span<const double> z = sol.z_at(m, i);
            z1_err += (z[0] - 1.0) * (z[0] - 1.0);
            z2_err += z[1] * z[1];
        }
        const double w1 = batch.level(m, 8)[0];
        y_err += std::pow(sol.y_at(m, 8) - (w1 + 0.5 * 0.5), 2.0);
    }
    const double count = static_cast<double>(sol.paths * 16);
    CHECK(std::sqrt(y_err / static_cast<double>(sol.paths)) <= 0.06);
    CHECK(std::sqrt(z1_err / count) <= 0.1);
    CHECK(std::sqrt(z2_err / count) <= 0.1);
}

TEST_CASE("picard stats are recorded") {
    TimeGrid grid = make_grid(1.0, 8);
    BrownianBatch batch = simulate_paths(grid, 1, 300, 8);
    std::vector<double> params{0.5};
    GeneratorSpec gen = make_builtin_generator("linear_y", params);
    SolutionEstimate sol = solve_lipschitz_bsde(gen, kTerminalW, batch,
                                                RegressionBasis{2, 1e-8, true}, PicardConfig{});
    REQUIRE(sol.picard.size() == 8);
    for (const PicardStepStats& s : sol.picard) {
        CHECK(s.max_iterations >= 1);
        CHECK(s.mean_iterations >= 1.0);
        CHECK(s.max_final_increment <= 1e-8);
    }
}
