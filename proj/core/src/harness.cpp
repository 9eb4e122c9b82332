#include "bsde/harness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "bsde/errors.hpp"

namespace bsde {

namespace {

std::string format_index(double n) {
    std::ostringstream out;
    out << n;
    return out.str();
}

MonotoneStat ordering_stat(const SolutionEstimate& low, const SolutionEstimate& high,
                           std::string label, double mono_tol) {
    // Violation: the lower-index solution exceeds the higher one.
    ComparisonReport cmp = comparison_check(high, low, mono_tol);
    MonotoneStat stat;
    stat.label = std::move(label);
    stat.violation_fraction = cmp.violation_fraction;
    stat.worst_violation = cmp.worst_violation;
    stat.worst_path = cmp.worst_path;
    stat.worst_step = cmp.worst_step;
    return stat;
}

PerIndexSummary summarize(double index, const SolutionEstimate& sol, const GeneratorSpec& gen,
                          const BrownianBatch& batch, double p) {
    PerIndexSummary s;
    s.index = index;
    s.y0_mean = sol.y0_mean;
    s.y0_spread = sol.y0_spread;
    s.sp = sp_norm(sol, p);
    s.hp = hp_norm(sol, p);
    for (const PicardStepStats& step : sol.picard) {
        s.picard_max_iterations = std::max(s.picard_max_iterations, step.max_iterations);
        s.picard_mean_iterations += step.mean_iterations;
    }
    if (!sol.picard.empty())
        s.picard_mean_iterations /= static_cast<double>(sol.picard.size());
    s.residual = bsde_residual(sol, gen, batch);
    return s;
}

} // namespace

ConvergenceReport run_n_sweep(const SweepConfig& cfg) {
    if (cfg.schedule.empty()) throw ConfigError("sweep schedule must not be empty");
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i)
        if (!(cfg.schedule[i] > cfg.schedule[i - 1]))
            throw ConfigError("sweep schedule must be strictly increasing");
    if (!(cfg.schedule.front() > cfg.base.growth_K))
        throw ConfigError("sweep schedule must start above the growth constant K = " +
                          std::to_string(cfg.base.growth_K));
    if (!(cfg.p > 1.0)) throw ConfigError("p must exceed 1");
    const double dt = cfg.grid.dt();
    for (double n : cfg.schedule)
        if (dt * n >= 1.0)
            throw NumericError("contraction guard failed for schedule index n = " +
                               format_index(n) + ": dt * n = " + std::to_string(dt * n) +
                               " >= 1; the minimal admissible N for this schedule is " +
                               std::to_string(minimal_steps_for(cfg.grid.horizon,
                                                                cfg.schedule.back())));

    ConvergenceReport report;
    report.config = cfg;
    report.batch = std::make_shared<BrownianBatch>(
        simulate_paths(cfg.grid, cfg.dimension, cfg.paths, cfg.seed, cfg.threads));
    const BrownianBatch& batch = *report.batch;

    std::vector<GeneratorSpec> drivers;
    drivers.reserve(cfg.schedule.size());
    for (double n : cfg.schedule) {
        ApproxFamily family = make_approx_family(cfg.base, n, cfg.envelope_search);
        drivers.push_back(envelope_generator(family));
        report.solutions.push_back(solve_lipschitz_bsde(drivers.back(), cfg.terminal, batch,
                                                        cfg.basis, cfg.picard, cfg.threads, n));
    }

    GeneratorSpec dominating = make_dominating_generator(cfg.base.bound_g, cfg.base.growth_K);
    report.dominating = solve_lipschitz_bsde(dominating, cfg.terminal, batch, cfg.basis,
                                             cfg.picard, cfg.threads);

    for (std::size_t j = 0; j < cfg.schedule.size(); ++j)
        report.per_index.push_back(
            summarize(cfg.schedule[j], report.solutions[j], drivers[j], batch, cfg.p));
    report.per_index.push_back(summarize(std::numeric_limits<double>::infinity(),
                                         report.dominating, dominating, batch, cfg.p));

    for (std::size_t j = 0; j + 1 < cfg.schedule.size(); ++j) {
        PairDistance pd;
        pd.index_low = cfg.schedule[j];
        pd.index_high = cfg.schedule[j + 1];
        pd.sp = sp_distance(report.solutions[j], report.solutions[j + 1], cfg.p);
        pd.hp = hp_distance(report.solutions[j], report.solutions[j + 1], cfg.p);
        report.pairs.push_back(pd);
    }

    for (std::size_t j = 0; j + 1 < cfg.schedule.size(); ++j)
        report.monotone.push_back(ordering_stat(
            report.solutions[j], report.solutions[j + 1],
            format_index(cfg.schedule[j]) + "<=" + format_index(cfg.schedule[j + 1]),
            cfg.mono_tol));
    for (std::size_t j = 0; j < cfg.schedule.size(); ++j)
        report.monotone.push_back(ordering_stat(report.solutions[j], report.dominating,
                                                format_index(cfg.schedule[j]) + "<=U",
                                                cfg.mono_tol));

    report.limit_residual_original =
        bsde_residual(report.solutions.back(), cfg.base, batch);
    return report;
}

MonotoneVerdict check_monotone(const ConvergenceReport& report, double mono_tol,
                               double stat_tol) {
    if (report.solutions.empty())
        throw ConfigError("check_monotone needs a report with stored solutions");
    MonotoneVerdict verdict;
    const auto& schedule = report.config.schedule;
    for (std::size_t j = 0; j + 1 < report.solutions.size(); ++j)
        verdict.stats.push_back(ordering_stat(
            report.solutions[j], report.solutions[j + 1],
            format_index(schedule[j]) + "<=" + format_index(schedule[j + 1]), mono_tol));
    for (std::size_t j = 0; j < report.solutions.size(); ++j)
        verdict.stats.push_back(ordering_stat(report.solutions[j], report.dominating,
                                              format_index(schedule[j]) + "<=U", mono_tol));
    for (const MonotoneStat& stat : verdict.stats)
        if (stat.violation_fraction > stat_tol) verdict.pass = false;
    return verdict;
}

CauchyTable cauchy_table(const ConvergenceReport& report, double final_fraction) {
    if (report.config.schedule.size() < 3)
        throw ConfigError("cauchy_table needs at least 3 schedule entries");
    CauchyTable table;
    for (const PairDistance& pd : report.pairs)
        table.rows.push_back({pd.index_low, pd.index_high, pd.sp.value, pd.sp.std_error,
                              pd.hp.value, pd.hp.std_error});

    bool pass = true;
    std::ostringstream detail;
    auto check_family = [&](const char* label, auto dist, auto se) {
        for (std::size_t j = 1; j < table.rows.size(); ++j) {
            const double allowed = dist(table.rows[j - 1]) +
                                   2.0 * (se(table.rows[j - 1]) + se(table.rows[j]));
            if (dist(table.rows[j]) > allowed) {
                pass = false;
                detail << label << " distance increased at pair " << j << "; ";
            }
        }
        const double first = dist(table.rows.front());
        const double last = dist(table.rows.back());
        if (last > final_fraction * first && last > 0.0) {
            pass = false;
            detail << label << " final distance " << last << " exceeds " << final_fraction
                   << " of first " << first << "; ";
        }
    };
    check_family("S^p", [](const CauchyRow& r) { return r.sp_dist; },
                 [](const CauchyRow& r) { return r.sp_se; });
    check_family("H^p", [](const CauchyRow& r) { return r.hp_dist; },
                 [](const CauchyRow& r) { return r.hp_se; });
    table.pass = pass;
    table.detail = detail.str();
    return table;
}

LimitResidualVerdict limit_residual(const ConvergenceReport& report,
                                    const GeneratorSpec& original, double residual_tol) {
    if (report.solutions.empty() || !report.batch)
        throw ConfigError("limit_residual needs a report with stored solutions");
    LimitResidualVerdict verdict;
    verdict.tolerance = residual_tol;
    verdict.residual = bsde_residual(report.solutions.back(), original, *report.batch);
    verdict.pass = verdict.residual.mean <= residual_tol;
    return verdict;
}

} // namespace bsde
