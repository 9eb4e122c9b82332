#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bsde/diagnostics.hpp"
#include "bsde/infconv.hpp"
#include "bsde/solver.hpp"

namespace bsde {

/// One n-sweep: envelope approximants of a base problem, all solved on one
/// shared path batch together with the dominating problem.
struct SweepConfig {
    std::vector<double> schedule; // strictly increasing, all > base.growth_K
    double p = 2.0;
    GeneratorSpec base;
    TerminalSpec terminal;
    TimeGrid grid;
    std::size_t dimension = 1;
    std::size_t paths = 0;
    std::uint64_t seed = 0;
    RegressionBasis basis;
    PicardConfig picard;
    // Envelope search used inside the solver loop; heavier than the single
    // point default so the envelope error stays well inside mono_tol.
    SearchParams envelope_search{21, 8};
    double mono_tol = 1e-2;
    double stat_tol = 1e-2;
    double residual_tol = 5e-2;
    unsigned threads = 0;
};

struct PerIndexSummary {
    double index = 0.0;
    double y0_mean = 0.0;
    double y0_spread = 0.0;
    NormEstimate sp;
    NormEstimate hp;
    std::size_t picard_max_iterations = 0;
    double picard_mean_iterations = 0.0;
    ResidualReport residual; // under the solved driver (f_n, or g + K(|y|+|z|) for U)
};

struct PairDistance {
    double index_low = 0.0;
    double index_high = 0.0;
    NormEstimate sp;
    NormEstimate hp;
};

struct MonotoneStat {
    std::string label; // e.g. "2<=4" or "16<=U"
    double violation_fraction = 0.0;
    double worst_violation = 0.0;
    std::size_t worst_path = 0;
    std::size_t worst_step = 0;
};

struct ConvergenceReport {
    SweepConfig config;
    std::shared_ptr<const BrownianBatch> batch;
    std::vector<SolutionEstimate> solutions; // one per schedule entry, in order
    SolutionEstimate dominating;
    std::vector<PerIndexSummary> per_index;  // schedule entries then U last
    std::vector<PairDistance> pairs;         // consecutive schedule pairs
    std::vector<MonotoneStat> monotone;      // consecutive pairs, then each n vs U
    ResidualReport limit_residual_original;  // largest-n solution under the base driver
};

/// Runs the full sweep on one shared batch. The contraction guard couples the
/// schedule to N: every scheduled index must satisfy dt * n < 1.
ConvergenceReport run_n_sweep(const SweepConfig& cfg);

struct MonotoneVerdict {
    bool pass = true;
    std::vector<MonotoneStat> stats;
};

/// Recomputes ordering violations from the stored solutions at the given
/// tolerances: fraction of (m, i) with Y_n > Y_n' + mono_tol must stay at or
/// below stat_tol for every consecutive pair and against U.
MonotoneVerdict check_monotone(const ConvergenceReport& report, double mono_tol,
                               double stat_tol);

struct CauchyRow {
    double index_low = 0.0;
    double index_high = 0.0;
    double sp_dist = 0.0, sp_se = 0.0;
    double hp_dist = 0.0, hp_se = 0.0;
};

struct CauchyTable {
    std::vector<CauchyRow> rows;
    bool pass = false;
    std::string detail;
};

/// PASS when consecutive distances are non-increasing within 2 standard errors
/// and the final distance is at most `final_fraction` of the first, in both
/// the S^p and H^p families. Needs at least 3 schedule entries.
CauchyTable cauchy_table(const ConvergenceReport& report, double final_fraction = 0.25);

struct LimitResidualVerdict {
    bool pass = false;
    ResidualReport residual;
    double tolerance = 0.0;
};

/// Residual of the proxy limit (largest-n solution) under the ORIGINAL driver.
LimitResidualVerdict limit_residual(const ConvergenceReport& report,
                                    const GeneratorSpec& original, double residual_tol);

} // namespace bsde
