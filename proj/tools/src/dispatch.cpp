#include "bsdelab/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

#include <json.hpp>

#include "bsde/errors.hpp"
#include "bsde/version.hpp"
#include "bsdelab/reports.hpp"

namespace bsdelab {

using nlohmann::json;

namespace {

std::string join_path(const std::string& dir, const std::string& name) {
    return dir + "/" + name;
}

void write_run_provenance(const RunConfig& cfg, json body) {
    body["subcommand"] = cfg.subcommand + (cfg.check_mode.empty() ? "" : " " + cfg.check_mode);
    body["version"] = bsde::kVersion;
    body["seed"] = cfg.get_seed("mc.seed");
    write_text_file(join_path(cfg.out_dir, "report.json"), body.dump(2) + "\n");
    write_text_file(join_path(cfg.out_dir, "config.effective"), cfg.effective_text());
}

int run_simulate(const RunConfig& cfg) {
    const bsde::TimeGrid grid = grid_from_config(cfg);
    const std::size_t d = cfg.get_count("mc.d");
    const std::size_t paths = cfg.get_count("mc.M");
    const std::uint64_t seed = cfg.get_seed("mc.seed");
    bsde::BrownianBatch batch = bsde::simulate_paths(grid, d, paths, seed, cfg.threads);
    bsde::write_batch_file(batch, join_path(cfg.out_dir, "batch.bin"));

    // Sample moments as a quick sanity block: increment mean, variance vs dt,
    // and quadratic variation vs d*T.
    const double dt = grid.dt();
    double sum = 0.0, sum_sq = 0.0, qv = 0.0;
    const std::size_t n_draws = paths * grid.steps * d;
    for (std::size_t m = 0; m < paths; ++m)
        for (std::size_t i = 0; i < grid.steps; ++i)
            for (double v : batch.increment(m, i)) {
                sum += v;
                sum_sq += v * v;
                qv += v * v;
            }
    json stats{{"increment_mean", sum / static_cast<double>(n_draws)},
               {"increment_variance", sum_sq / static_cast<double>(n_draws)},
               {"increment_variance_expected", dt},
               {"quadratic_variation_mean", qv / static_cast<double>(paths)},
               {"quadratic_variation_expected", static_cast<double>(d) * grid.horizon}};
    write_run_provenance(cfg, json{{"simulate", stats}});
    return kExitOk;
}

int run_solve(const RunConfig& cfg) {
    const bsde::GeneratorSpec gen = generator_from_config(cfg, "generator");
    if (!gen.lipschitz_const)
        throw bsde::ConfigError("solve needs a Lipschitz driver ('" + gen.name +
                                "' is not); use sweep for linear-growth drivers");
    const bsde::TerminalSpec terminal = terminal_from_config(cfg, "terminal");
    const bsde::TimeGrid grid = grid_from_config(cfg);
    bsde::BrownianBatch batch = bsde::simulate_paths(grid, cfg.get_count("mc.d"),
                                                     cfg.get_count("mc.M"),
                                                     cfg.get_seed("mc.seed"), cfg.threads);
    bsde::SolutionEstimate sol =
        bsde::solve_lipschitz_bsde(gen, terminal, batch, basis_from_config(cfg),
                                   picard_from_config(cfg), cfg.threads);
    const double p = cfg.get_real("lp.p");

    write_solution_csv(join_path(cfg.out_dir, "solution.csv"), sol);
    bsde::PerIndexSummary summary;
    summary.index = gen.lipschitz_const.value();
    summary.y0_mean = sol.y0_mean;
    summary.y0_spread = sol.y0_spread;
    summary.sp = bsde::sp_norm(sol, p);
    summary.hp = bsde::hp_norm(sol, p);
    for (const bsde::PicardStepStats& s : sol.picard) {
        summary.picard_max_iterations = std::max(summary.picard_max_iterations, s.max_iterations);
        summary.picard_mean_iterations += s.mean_iterations;
    }
    if (!sol.picard.empty())
        summary.picard_mean_iterations /= static_cast<double>(sol.picard.size());
    summary.residual = bsde::bsde_residual(sol, gen, batch);
    write_norms_csv(join_path(cfg.out_dir, "norms.csv"), {summary});
    write_residuals_csv(join_path(cfg.out_dir, "residuals.csv"), {summary});

    json body{{"solve",
               json{{"generator", gen.name},
                    {"terminal", terminal.name},
                    {"y0_mean", sol.y0_mean},
                    {"y0_spread", sol.y0_spread},
                    {"sp_norm", norm_to_json(summary.sp)},
                    {"hp_norm", norm_to_json(summary.hp)},
                    {"residual", residual_to_json(summary.residual)},
                    {"picard_max_iterations", summary.picard_max_iterations},
                    {"picard_mean_iterations", summary.picard_mean_iterations}}}};
    write_run_provenance(cfg, std::move(body));
    return kExitOk;
}

int run_envelope(const RunConfig& cfg) {
    const bsde::GeneratorSpec gen = generator_from_config(cfg, "generator");
    bsde::SearchParams search{cfg.get_count("envelope.q"), cfg.get_count("envelope.r")};
    const bsde::ApproxFamily family =
        bsde::make_approx_family(gen, cfg.get_real("envelope.n"), search);
    const double y_min = cfg.get_real("envelope.y_min");
    const double y_max = cfg.get_real("envelope.y_max");
    const std::size_t points = cfg.get_count("envelope.points");
    if (points < 2) throw bsde::ConfigError("envelope.points must be at least 2");
    if (!(y_max > y_min)) throw bsde::ConfigError("envelope.y_max must exceed envelope.y_min");

    const std::vector<double> state(cfg.get_count("mc.d"), 0.0);
    const std::vector<double> z(cfg.get_count("mc.d"), 0.0);
    std::vector<EnvelopeRow> rows;
    rows.reserve(points);
    for (std::size_t j = 0; j < points; ++j) {
        const double y = y_min + (y_max - y_min) * static_cast<double>(j) /
                                     static_cast<double>(points - 1);
        const bsde::EnvelopeValue ev = bsde::inf_convolve(family, 0.0, state, y, z);
        rows.push_back({y, gen(0.0, state, y, z), ev.value, ev.tol});
    }
    write_envelope_csv(join_path(cfg.out_dir, "envelope.csv"), rows);
    write_run_provenance(cfg, json{{"envelope", json{{"n", family.index},
                                                     {"points", points},
                                                     {"generator", gen.name}}}});
    return kExitOk;
}

int run_sweep(const RunConfig& cfg) {
    bsde::SweepConfig sweep = sweep_from_config(cfg);
    bsde::ConvergenceReport report = bsde::run_n_sweep(sweep);

    bsde::MonotoneVerdict monotone =
        bsde::check_monotone(report, sweep.mono_tol, sweep.stat_tol);
    bsde::LimitResidualVerdict limit =
        bsde::limit_residual(report, sweep.base, sweep.residual_tol);
    bool cauchy_applicable = sweep.schedule.size() >= 3;
    bsde::CauchyTable cauchy;
    if (cauchy_applicable) cauchy = bsde::cauchy_table(report);

    write_norms_csv(join_path(cfg.out_dir, "norms.csv"), report.per_index);
    write_residuals_csv(join_path(cfg.out_dir, "residuals.csv"), report.per_index);
    write_monotone_csv(join_path(cfg.out_dir, "monotone.csv"), monotone.stats);
    if (cauchy_applicable) write_cauchy_csv(join_path(cfg.out_dir, "cauchy.csv"), cauchy);

    json pairs = json::array();
    for (const bsde::PairDistance& pd : report.pairs)
        pairs.push_back(json{{"n_low", pd.index_low},
                             {"n_high", pd.index_high},
                             {"sp", norm_to_json(pd.sp)},
                             {"hp", norm_to_json(pd.hp)}});
    json per_n = json::array();
    for (const bsde::PerIndexSummary& s : report.per_index)
        per_n.push_back(json{{"n", std::isinf(s.index) ? json("U") : json(s.index)},
                             {"y0_mean", s.y0_mean},
                             {"y0_spread", s.y0_spread},
                             {"sp_norm", norm_to_json(s.sp)},
                             {"hp_norm", norm_to_json(s.hp)},
                             {"picard_max_iterations", s.picard_max_iterations},
                             {"picard_mean_iterations", s.picard_mean_iterations},
                             {"residual", residual_to_json(s.residual)}});
    json mono = json::array();
    for (const bsde::MonotoneStat& stat : monotone.stats)
        mono.push_back(json{{"comparison", stat.label},
                            {"violation_fraction", stat.violation_fraction},
                            {"worst_violation", stat.worst_violation},
                            {"worst_path", stat.worst_path},
                            {"worst_step", stat.worst_step}});

    json body{{"sweep",
               json{{"schedule", sweep.schedule},
                    {"p", sweep.p},
                    {"per_n", per_n},
                    {"pairs", pairs},
                    {"monotone", mono},
                    {"monotone_pass", monotone.pass},
                    {"cauchy_pass", cauchy_applicable ? json(cauchy.pass) : json()},
                    {"cauchy_detail", cauchy.detail},
                    {"limit_residual", residual_to_json(limit.residual)},
                    {"limit_residual_pass", limit.pass}}}};
    write_run_provenance(cfg, std::move(body));

    const bool pass = monotone.pass && limit.pass && (!cauchy_applicable || cauchy.pass);
    if (!pass) {
        std::cerr << "sweep verdicts failed:";
        if (!monotone.pass) std::cerr << " monotone";
        if (!limit.pass)
            std::cerr << " limit-residual(" << limit.residual.mean << " > " << limit.tolerance
                      << ")";
        if (cauchy_applicable && !cauchy.pass) std::cerr << " cauchy[" << cauchy.detail << "]";
        std::cerr << "\n";
    }
    return pass ? kExitOk : kExitCheckFailed;
}

int run_check(const RunConfig& cfg) {
    const std::string& mode = cfg.check_mode;
    const double p = cfg.get_real("lp.p");
    json body;
    bool pass = false;
    std::vector<bsde::PerIndexSummary> solved_rows;

    auto summarize_solution = [&](const bsde::SolutionEstimate& sol,
                                  const bsde::GeneratorSpec& gen,
                                  const bsde::BrownianBatch& batch) {
        bsde::PerIndexSummary row;
        row.index = gen.lipschitz_const.value_or(0.0);
        row.y0_mean = sol.y0_mean;
        row.y0_spread = sol.y0_spread;
        row.sp = bsde::sp_norm(sol, p);
        row.hp = bsde::hp_norm(sol, p);
        for (const bsde::PicardStepStats& s : sol.picard) {
            row.picard_max_iterations = std::max(row.picard_max_iterations, s.max_iterations);
            row.picard_mean_iterations += s.mean_iterations;
        }
        if (!sol.picard.empty())
            row.picard_mean_iterations /= static_cast<double>(sol.picard.size());
        row.residual = bsde::bsde_residual(sol, gen, batch);
        solved_rows.push_back(std::move(row));
    };

    if (mode == "lemma31") {
        const bsde::GeneratorSpec gen = generator_from_config(cfg, "generator");
        bsde::Lemma31Config lcfg;
        lcfg.search = bsde::SearchParams{cfg.get_count("envelope.q"), cfg.get_count("envelope.r")};
        lcfg.dimension = cfg.get_count("mc.d");
        const std::vector<double> indices = cfg.get_list("sweep.schedule");
        bsde::Lemma31Report report = bsde::lemma31_suite(
            gen, indices, cfg.get_count("check.samples"), cfg.get_seed("mc.seed"), lcfg);
        pass = report.all_pass();
        body = json{{"lemma31", lemma31_to_json(report)}};
    } else if (mode == "residual") {
        const bsde::GeneratorSpec gen = generator_from_config(cfg, "generator");
        if (!gen.lipschitz_const)
            throw bsde::ConfigError("check residual needs a Lipschitz driver");
        const bsde::TerminalSpec terminal = terminal_from_config(cfg, "terminal");
        bsde::BrownianBatch batch =
            bsde::simulate_paths(grid_from_config(cfg), cfg.get_count("mc.d"),
                                 cfg.get_count("mc.M"), cfg.get_seed("mc.seed"), cfg.threads);
        bsde::SolutionEstimate sol =
            bsde::solve_lipschitz_bsde(gen, terminal, batch, basis_from_config(cfg),
                                       picard_from_config(cfg), cfg.threads);
        bsde::ResidualReport residual = bsde::bsde_residual(sol, gen, batch);
        const double tol = cfg.get_real("sweep.residual_tol");
        pass = residual.mean <= tol;
        body = json{{"residual", residual_to_json(residual)}, {"tolerance", tol}};
        summarize_solution(sol, gen, batch);
    } else {
        // The two-problem checks: solve both problems on one coupled batch.
        const bsde::GeneratorSpec gen_a = generator_from_config(cfg, "generator");
        const bsde::GeneratorSpec gen_b = generator_from_config(cfg, "generator2");
        const bsde::TerminalSpec term_a = terminal_from_config(cfg, "terminal");
        const bsde::TerminalSpec term_b = terminal_from_config(cfg, "terminal2");
        if (!gen_a.lipschitz_const || !gen_b.lipschitz_const)
            throw bsde::ConfigError("check " + mode + " needs Lipschitz drivers");
        bsde::BrownianBatch batch =
            bsde::simulate_paths(grid_from_config(cfg), cfg.get_count("mc.d"),
                                 cfg.get_count("mc.M"), cfg.get_seed("mc.seed"), cfg.threads);
        const bsde::RegressionBasis basis = basis_from_config(cfg);
        const bsde::PicardConfig picard = picard_from_config(cfg);
        bsde::SolutionEstimate sol_a =
            bsde::solve_lipschitz_bsde(gen_a, term_a, batch, basis, picard, cfg.threads);

        if (mode == "apriori-i") {
            bsde::AprioriReport report =
                bsde::check_apriori_i(sol_a, gen_a, batch, p, cfg.get_real("check.c"),
                                      cfg.get_real("check.residual_threshold"));
            pass = report.pass;
            body = json{{"apriori_i", apriori_to_json(report)}};
            summarize_solution(sol_a, gen_a, batch);
        } else if (mode == "apriori-ii") {
            bsde::SolutionEstimate sol_b =
                bsde::solve_lipschitz_bsde(gen_b, term_b, batch, basis, picard, cfg.threads);
            bsde::DeltaReport report = bsde::check_apriori_ii(sol_a, sol_b, gen_a, gen_b, batch,
                                                              p, cfg.get_real("check.c"));
            pass = report.pass;
            body = json{{"apriori_ii", delta_to_json(report)}};
            summarize_solution(sol_a, gen_a, batch);
            summarize_solution(sol_b, gen_b, batch);
        } else if (mode == "comparison") {
            bsde::SolutionEstimate sol_b =
                bsde::solve_lipschitz_bsde(gen_b, term_b, batch, basis, picard, cfg.threads);
            bsde::ComparisonReport report =
                bsde::comparison_check(sol_a, sol_b, cfg.get_real("sweep.mono_tol"));
            const double stat_tol = cfg.get_real("sweep.stat_tol");
            pass = report.violation_fraction <= stat_tol;
            body = json{{"comparison",
                         json{{"violation_fraction", report.violation_fraction},
                              {"worst_violation", report.worst_violation},
                              {"worst_path", report.worst_path},
                              {"worst_step", report.worst_step},
                              {"stat_tol", stat_tol}}}};
            summarize_solution(sol_a, gen_a, batch);
            summarize_solution(sol_b, gen_b, batch);
        } else {
            throw bsde::ConfigError("unknown check mode '" + mode +
                                    "'; expected apriori-i, apriori-ii, comparison, lemma31 "
                                    "or residual");
        }
    }
    if (!solved_rows.empty()) {
        write_norms_csv(join_path(cfg.out_dir, "norms.csv"), solved_rows);
        write_residuals_csv(join_path(cfg.out_dir, "residuals.csv"), solved_rows);
    }
    body["pass"] = pass;
    write_run_provenance(cfg, std::move(body));
    return pass ? kExitOk : kExitCheckFailed;
}

} // namespace

int dispatch(const RunConfig& cfg) {
    try {
        ensure_directory(cfg.out_dir);
        if (cfg.subcommand == "simulate") return run_simulate(cfg);
        if (cfg.subcommand == "solve") return run_solve(cfg);
        if (cfg.subcommand == "envelope") return run_envelope(cfg);
        if (cfg.subcommand == "sweep") return run_sweep(cfg);
        if (cfg.subcommand == "check") return run_check(cfg);
        throw bsde::ConfigError("unknown subcommand '" + cfg.subcommand + "'");
    } catch (const bsde::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const bsde::NumericError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericError;
    }
}

} // namespace bsdelab
