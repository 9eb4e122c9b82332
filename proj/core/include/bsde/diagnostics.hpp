#pragma once

#include <cstddef>
#include <vector>

#include "bsde/brownian.hpp"
#include "bsde/generator.hpp"
#include "bsde/solver.hpp"

namespace bsde {

/// Monte Carlo estimate of a process norm. The standard error is computed by
/// batch means over path blocks on the p-th moment and delta-method propagated
/// to the norm itself.
struct NormEstimate {
    double value = 0.0;
    double std_error = 0.0;
    double p = 0.0;
    std::size_t paths = 0;
    // Set when the top 1% of paths carries more than half of the p-th moment,
    // a sign that M is too small for this p.
    bool heavy_tail_warning = false;
};

/// ((1/M) sum_m max_i |Y[m][i]|^p)^(1/p).
NormEstimate sp_norm(const SolutionEstimate& sol, double p);

/// ((1/M) sum_m (sum_i |Z[m][i]|^2 dt)^(p/2))^(1/p).
NormEstimate hp_norm(const SolutionEstimate& sol, double p);

/// Norms of the pathwise difference; both solutions must come from the same
/// batch (coupled paths), otherwise the distance is statistically meaningless
/// and the call is rejected.
NormEstimate sp_distance(const SolutionEstimate& a, const SolutionEstimate& b, double p);
NormEstimate hp_distance(const SolutionEstimate& a, const SolutionEstimate& b, double p);

/// Per-path defect of the discrete backward equation:
///   R[m] = max_i |Y_i - xi - sum_{j>=i} f(t_j, W_j, Y_j, Z_j) dt
///                + sum_{j>=i} Z_j . dW_j|.
struct ResidualReport {
    double mean = 0.0;
    double q50 = 0.0;
    double q90 = 0.0;
    double q99 = 0.0;
    double max = 0.0;
    std::vector<double> per_path;
};

ResidualReport bsde_residual(const SolutionEstimate& sol, const GeneratorSpec& gen,
                             const BrownianBatch& batch);

/// LHS/RHS ratios of the single-solution a priori estimates:
///   ||Y||^p_Sp <= C E[|xi|^p + int |Y|^{p-1} |f| ds]
///   ||Z||^p_Hp <= C { E[|xi|^p + (int |Y| |f| ds)^{p/2}] + ||Y||^p_Sp }.
struct AprioriReport {
    double ratio_y = 0.0;
    double ratio_z = 0.0;
    double lhs_y = 0.0, rhs_y = 0.0;
    double lhs_z = 0.0, rhs_z = 0.0;
    double c_used = 0.0;
    bool pass = false;
};

/// Requires the solution to actually solve the generator's equation: mean
/// residual above `residual_threshold` is a precondition failure.
AprioriReport check_apriori_i(const SolutionEstimate& sol, const GeneratorSpec& gen,
                              const BrownianBatch& batch, double p, double c,
                              double residual_threshold = 0.05);

/// Coupled-difference a priori estimates. ratio_ii_* are the difference-form
/// ratios with df evaluated pathwise as f1(t,Y1,Z1) - f2(t,Y2,Z2); ratio_i_*
/// are the single-solution ratios of the first argument under its generator,
/// reported alongside for context.
struct DeltaReport {
    NormEstimate sp_dist;
    NormEstimate hp_dist;
    double delta_terminal_pth_moment = 0.0;
    double gap_term_y = 0.0; // E[|dY_T|^p + int |dY|^{p-1} |df| ds]
    double gap_term_z = 0.0; // E[|dY_T|^p + (int |dY| |df| ds)^{p/2}]
    double ratio_i_y = 0.0;
    double ratio_i_z = 0.0;
    double ratio_ii_y = 0.0;
    double ratio_ii_z = 0.0;
    double c_used = 0.0;
    bool pass = false;
};

DeltaReport check_apriori_ii(const SolutionEstimate& a, const SolutionEstimate& b,
                             const GeneratorSpec& gen_a, const GeneratorSpec& gen_b,
                             const BrownianBatch& batch, double p, double c);

/// Fraction of (path, step) pairs with Y_a < Y_b - tol; the comparison theorem
/// predicts a vanishing fraction when (f_a, xi_a) dominates (f_b, xi_b).
struct ComparisonReport {
    double violation_fraction = 0.0;
    double worst_violation = 0.0;
    std::size_t worst_path = 0;
    std::size_t worst_step = 0;
};

ComparisonReport comparison_check(const SolutionEstimate& upper, const SolutionEstimate& lower,
                                  double tol);

} // namespace bsde
