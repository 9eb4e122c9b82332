#include "bsde/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "bsde/errors.hpp"

namespace bsde {

namespace {

constexpr std::size_t kBatchMeansBlocks = 20;

void require_nonempty(const SolutionEstimate& sol) {
    if (sol.paths == 0 || sol.y.empty()) throw ConfigError("empty solution estimate");
}

void require_coupled(const SolutionEstimate& a, const SolutionEstimate& b) {
    if (!(a.batch_id == b.batch_id))
        throw ConfigError("solutions are not coupled: distances require the same "
                          "Brownian batch (same seed, d, M, grid)");
}

/// Norm estimate from per-path statistics s_m >= 0 of the p-th power:
/// value = mean(s)^(1/p), std error by batch means + delta method.
NormEstimate norm_from_powers(const std::vector<double>& powers, double p) {
    NormEstimate est;
    est.p = p;
    est.paths = powers.size();
    const std::size_t m_total = powers.size();
    double sum = 0.0;
    for (double s : powers) sum += s;
    const double moment = sum / static_cast<double>(m_total);
    est.value = moment > 0.0 ? std::pow(moment, 1.0 / p) : 0.0;

    const std::size_t blocks = std::min<std::size_t>(kBatchMeansBlocks, m_total);
    if (blocks >= 2) {
        double var_acc = 0.0;
        for (std::size_t b = 0; b < blocks; ++b) {
            const std::size_t lo = m_total * b / blocks;
            const std::size_t hi = m_total * (b + 1) / blocks;
            double bm = 0.0;
            for (std::size_t m = lo; m < hi; ++m) bm += powers[m];
            bm /= static_cast<double>(hi - lo);
            var_acc += (bm - moment) * (bm - moment);
        }
        const double se_moment =
            std::sqrt(var_acc / static_cast<double>(blocks * (blocks - 1)));
        est.std_error = moment > 0.0
                            ? se_moment * std::pow(moment, 1.0 / p - 1.0) / p
                            : 0.0;
    }

    // Heavy-tail indicator: share of the p-th moment carried by the top 1%.
    if (m_total >= 100 && sum > 0.0) {
        std::vector<double> sorted(powers);
        std::sort(sorted.begin(), sorted.end(), std::greater<double>());
        const std::size_t top = (m_total + 99) / 100;
        double top_sum = 0.0;
        for (std::size_t m = 0; m < top; ++m) top_sum += sorted[m];
        est.heavy_tail_warning = top_sum > 0.5 * sum;
    }
    return est;
}

std::vector<double> sp_powers(const SolutionEstimate& sol, double p) {
    std::vector<double> powers(sol.paths);
    const std::size_t n = sol.grid.steps;
    for (std::size_t m = 0; m < sol.paths; ++m) {
        double sup = 0.0;
        for (std::size_t i = 0; i <= n; ++i) sup = std::max(sup, std::fabs(sol.y_at(m, i)));
        powers[m] = std::pow(sup, p);
    }
    return powers;
}

std::vector<double> hp_powers(const SolutionEstimate& sol, double p) {
    std::vector<double> powers(sol.paths);
    const std::size_t n = sol.grid.steps;
    const double dt = sol.grid.dt();
    for (std::size_t m = 0; m < sol.paths; ++m) {
        double quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::span<const double> z = sol.z_at(m, i);
            double zz = 0.0;
            for (double v : z) zz += v * v;
            quad += zz * dt;
        }
        powers[m] = std::pow(quad, 0.5 * p);
    }
    return powers;
}

double quantile(std::vector<double> sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double w = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - w) + sorted[hi] * w;
}

void require_p(double p) {
    if (!(p > 1.0)) throw ConfigError("p must exceed 1, got " + std::to_string(p));
}

} // namespace

NormEstimate sp_norm(const SolutionEstimate& sol, double p) {
    require_nonempty(sol);
    require_p(p);
    return norm_from_powers(sp_powers(sol, p), p);
}

NormEstimate hp_norm(const SolutionEstimate& sol, double p) {
    require_nonempty(sol);
    require_p(p);
    return norm_from_powers(hp_powers(sol, p), p);
}

NormEstimate sp_distance(const SolutionEstimate& a, const SolutionEstimate& b, double p) {
    require_nonempty(a);
    require_p(p);
    require_coupled(a, b);
    const std::size_t n = a.grid.steps;
    std::vector<double> powers(a.paths);
    for (std::size_t m = 0; m < a.paths; ++m) {
        double sup = 0.0;
        for (std::size_t i = 0; i <= n; ++i)
            sup = std::max(sup, std::fabs(a.y_at(m, i) - b.y_at(m, i)));
        powers[m] = std::pow(sup, p);
    }
    return norm_from_powers(powers, p);
}

NormEstimate hp_distance(const SolutionEstimate& a, const SolutionEstimate& b, double p) {
    require_nonempty(a);
    require_p(p);
    require_coupled(a, b);
    const std::size_t n = a.grid.steps;
    const double dt = a.grid.dt();
    std::vector<double> powers(a.paths);
    for (std::size_t m = 0; m < a.paths; ++m) {
        double quad = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::span<const double> za = a.z_at(m, i);
            std::span<const double> zb = b.z_at(m, i);
            double zz = 0.0;
            for (std::size_t k = 0; k < za.size(); ++k) {
                const double dk = za[k] - zb[k];
                zz += dk * dk;
            }
            quad += zz * dt;
        }
        powers[m] = std::pow(quad, 0.5 * p);
    }
    return norm_from_powers(powers, p);
}

ResidualReport bsde_residual(const SolutionEstimate& sol, const GeneratorSpec& gen,
                             const BrownianBatch& batch) {
    require_nonempty(sol);
    if (!(sol.batch_id == batch.id()))
        throw ConfigError("residual check requires the solution's own batch");
    const std::size_t n = sol.grid.steps;
    const double dt = sol.grid.dt();

    ResidualReport report;
    report.per_path.resize(sol.paths);
    double sum = 0.0;
    for (std::size_t m = 0; m < sol.paths; ++m) {
        std::vector<double> levels = batch.path_levels(m);
        const double xi = sol.y_at(m, n);
        // Backward partial sums of f dt - Z . dW from step i to the end.
        double tail = 0.0;
        double worst = 0.0; // i = N term is exactly zero
        for (std::size_t i = n; i-- > 0;) {
            std::span<const double> state{levels.data() + i * sol.dimension, sol.dimension};
            std::span<const double> z = sol.z_at(m, i);
            std::span<const double> dw = batch.increment(m, i);
            double z_dw = 0.0;
            for (std::size_t k = 0; k < z.size(); ++k) z_dw += z[k] * dw[k];
            tail += gen(sol.grid.node(i), state, sol.y_at(m, i), z) * dt - z_dw;
            worst = std::max(worst, std::fabs(sol.y_at(m, i) - xi - tail));
        }
        report.per_path[m] = worst;
        sum += worst;
    }
    report.mean = sum / static_cast<double>(sol.paths);
    std::vector<double> sorted(report.per_path);
    std::sort(sorted.begin(), sorted.end());
    report.q50 = quantile(sorted, 0.50);
    report.q90 = quantile(sorted, 0.90);
    report.q99 = quantile(sorted, 0.99);
    report.max = sorted.back();
    return report;
}

namespace {

struct AprioriTerms {
    double lhs_y = 0.0, rhs_y = 0.0;
    double lhs_z = 0.0, rhs_z = 0.0;
};

// Shared skeleton of both a priori displays. xi_term, weight and df are taken
// per path: for the single-solution form df is |f(t, Y, Z)| and weight is |Y|;
// for the difference form df is |f1 - f2| along the coupled pair and the
// weight is |dY|.
AprioriTerms apriori_terms(const SolutionEstimate& shape, double p, double sp_pow,
                           double hp_pow,
                           const std::function<double(std::size_t)>& terminal_abs,
                           const std::function<double(std::size_t, std::size_t)>& weight_abs,
                           const std::function<double(std::size_t, std::size_t)>& driver_abs) {
    const std::size_t n = shape.grid.steps;
    const double dt = shape.grid.dt();
    double rhs_y = 0.0, rhs_z = 0.0;
    for (std::size_t m = 0; m < shape.paths; ++m) {
        const double xi_p = std::pow(terminal_abs(m), p);
        double int_pm1 = 0.0; // int |Y|^{p-1} |f| ds
        double int_w = 0.0;   // int |Y| |f| ds
        for (std::size_t i = 0; i < n; ++i) {
            const double w = weight_abs(m, i);
            const double f = driver_abs(m, i);
            int_pm1 += std::pow(w, p - 1.0) * f * dt;
            int_w += w * f * dt;
        }
        rhs_y += xi_p + int_pm1;
        rhs_z += xi_p + std::pow(int_w, 0.5 * p);
    }
    AprioriTerms terms;
    terms.lhs_y = sp_pow;
    terms.rhs_y = rhs_y / static_cast<double>(shape.paths);
    terms.lhs_z = hp_pow;
    terms.rhs_z = rhs_z / static_cast<double>(shape.paths) + sp_pow;
    return terms;
}

double safe_ratio(double lhs, double rhs) {
    if (rhs <= 0.0) return lhs <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return lhs / rhs;
}

} // namespace

AprioriReport check_apriori_i(const SolutionEstimate& sol, const GeneratorSpec& gen,
                              const BrownianBatch& batch, double p, double c,
                              double residual_threshold) {
    require_nonempty(sol);
    require_p(p);
    if (!(c > 0.0)) throw ConfigError("a priori constant C must be positive");
    ResidualReport residual = bsde_residual(sol, gen, batch);
    if (residual.mean > residual_threshold)
        throw ConfigError("a priori check precondition failed: mean residual " +
                          std::to_string(residual.mean) + " exceeds threshold " +
                          std::to_string(residual_threshold));

    const std::size_t n = sol.grid.steps;
    const NormEstimate sp = sp_norm(sol, p);
    const NormEstimate hp = hp_norm(sol, p);
    const double sp_pow = std::pow(sp.value, p);
    const double hp_pow = std::pow(hp.value, p);

    // Cache path levels per call; driver values are re-evaluated fresh.
    std::vector<double> f_abs(sol.paths * n);
    for (std::size_t m = 0; m < sol.paths; ++m) {
        std::vector<double> levels = batch.path_levels(m);
        for (std::size_t i = 0; i < n; ++i) {
            std::span<const double> state{levels.data() + i * sol.dimension, sol.dimension};
            f_abs[m * n + i] =
                std::fabs(gen(sol.grid.node(i), state, sol.y_at(m, i), sol.z_at(m, i)));
        }
    }

    AprioriTerms terms = apriori_terms(
        sol, p, sp_pow, hp_pow, [&](std::size_t m) { return std::fabs(sol.y_at(m, n)); },
        [&](std::size_t m, std::size_t i) { return std::fabs(sol.y_at(m, i)); },
        [&](std::size_t m, std::size_t i) { return f_abs[m * n + i]; });

    AprioriReport report;
    report.lhs_y = terms.lhs_y;
    report.rhs_y = terms.rhs_y;
    report.lhs_z = terms.lhs_z;
    report.rhs_z = terms.rhs_z;
    report.ratio_y = safe_ratio(terms.lhs_y, terms.rhs_y);
    report.ratio_z = safe_ratio(terms.lhs_z, terms.rhs_z);
    report.c_used = c;
    report.pass = report.ratio_y <= c && report.ratio_z <= c;
    return report;
}

DeltaReport check_apriori_ii(const SolutionEstimate& a, const SolutionEstimate& b,
                             const GeneratorSpec& gen_a, const GeneratorSpec& gen_b,
                             const BrownianBatch& batch, double p, double c) {
    require_nonempty(a);
    require_p(p);
    require_coupled(a, b);
    if (!(a.batch_id == batch.id()))
        throw ConfigError("a priori (ii) check requires the solutions' own batch");
    if (!(c > 0.0)) throw ConfigError("a priori constant C must be positive");

    const std::size_t n = a.grid.steps;
    DeltaReport report;
    report.c_used = c;
    report.sp_dist = sp_distance(a, b, p);
    report.hp_dist = hp_distance(a, b, p);
    const double sp_pow = std::pow(report.sp_dist.value, p);
    const double hp_pow = std::pow(report.hp_dist.value, p);

    double dxi_p = 0.0;
    std::vector<double> df_abs(a.paths * n);
    for (std::size_t m = 0; m < a.paths; ++m) {
        std::vector<double> levels = batch.path_levels(m);
        dxi_p += std::pow(std::fabs(a.y_at(m, n) - b.y_at(m, n)), p);
        for (std::size_t i = 0; i < n; ++i) {
            std::span<const double> state{levels.data() + i * a.dimension, a.dimension};
            const double t = a.grid.node(i);
            df_abs[m * n + i] = std::fabs(gen_a(t, state, a.y_at(m, i), a.z_at(m, i)) -
                                          gen_b(t, state, b.y_at(m, i), b.z_at(m, i)));
        }
    }
    report.delta_terminal_pth_moment = dxi_p / static_cast<double>(a.paths);

    AprioriTerms terms = apriori_terms(
        a, p, sp_pow, hp_pow,
        [&](std::size_t m) { return std::fabs(a.y_at(m, n) - b.y_at(m, n)); },
        [&](std::size_t m, std::size_t i) { return std::fabs(a.y_at(m, i) - b.y_at(m, i)); },
        [&](std::size_t m, std::size_t i) { return df_abs[m * n + i]; });
    report.gap_term_y = terms.rhs_y;
    report.gap_term_z = terms.rhs_z - sp_pow; // report the expectation alone
    report.ratio_ii_y = safe_ratio(terms.lhs_y, terms.rhs_y);
    report.ratio_ii_z = safe_ratio(terms.lhs_z, terms.rhs_z);

    // Single-solution ratios of the first argument, for context.
    AprioriReport single = check_apriori_i(a, gen_a, batch, p, c,
                                           std::numeric_limits<double>::infinity());
    report.ratio_i_y = single.ratio_y;
    report.ratio_i_z = single.ratio_z;

    report.pass = report.ratio_ii_y <= c && report.ratio_ii_z <= c;
    return report;
}

ComparisonReport comparison_check(const SolutionEstimate& upper, const SolutionEstimate& lower,
                                  double tol) {
    require_nonempty(upper);
    require_coupled(upper, lower);
    const std::size_t n = upper.grid.steps;
    ComparisonReport report;
    std::size_t violations = 0;
    for (std::size_t m = 0; m < upper.paths; ++m) {
        for (std::size_t i = 0; i <= n; ++i) {
            const double gap = lower.y_at(m, i) - upper.y_at(m, i); // positive = violation
            if (gap > tol) {
                ++violations;
                if (gap > report.worst_violation) {
                    report.worst_violation = gap;
                    report.worst_path = m;
                    report.worst_step = i;
                }
            }
        }
    }
    report.violation_fraction =
        static_cast<double>(violations) / static_cast<double>(upper.paths * (n + 1));
    return report;
}

} // namespace bsde
