#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bsde/generator.hpp"

namespace bsde {

/// Multi-level grid search parameters: q odd points per active axis per level,
/// r refinement levels, window shrinking 4x per level around the incumbent.
struct SearchParams {
    std::size_t points_per_axis = 33;
    std::size_t levels = 4;
};

/// Index-n Lipschitz envelope of a base generator:
///   f_n(t, x, y, z) = inf_{u,v} { f(t, x, u, v) + n (|y-u| + |z-v|) }.
/// Requires n strictly above the base growth constant K so the search window
/// stays finite.
struct ApproxFamily {
    GeneratorSpec base;
    double index = 0.0;
    SearchParams search;
};

ApproxFamily make_approx_family(GeneratorSpec base, double index, SearchParams search = {});

/// Sufficient search radius: the infimum over the whole plane equals the
/// infimum over |y-u| + |z-v| <= R with R = 2 (g + K(|y| + |z|)) / (n - K).
/// Any candidate farther out scores above the value achieved at (u,v) = (y,z).
double localization_radius(double g_value, double growth_K, double index, double y,
                           std::span<const double> z);

struct EnvelopeValue {
    double value = 0.0;
    double tol = 0.0; // index * final grid cell diameter; 0 for exact short-circuits
};

/// Envelope value at one point. Lipschitz bases with lipschitz_const <= n are
/// returned exactly (the envelope fixes them); otherwise multi-level grid
/// search over the localization ball, restricted to the axes the base actually
/// depends on. Search dimension above 3 is rejected.
EnvelopeValue inf_convolve(const ApproxFamily& family, double t, std::span<const double> state,
                           double y, std::span<const double> z);

/// The envelope as a generator: same K and g as the base, lipschitz_const = n.
GeneratorSpec envelope_generator(const ApproxFamily& family);

/// Property suite for the envelope family over sampled points:
///   bound:      |f_n| <= g + K(|y| + |z|)            (+ grid tolerance)
///   monotone:   f_n <= f_n' <= f for n < n'          (+ grid tolerances)
///   lipschitz:  |f_n(P1) - f_n(P2)| <= n (|dy| + |dz|) (+ grid tolerances)
///   converge:   f_{n_k}(y + d_k, z + d_k) -> f(y, z) along d_k = 2^-k,
///               n_k = indices[0] * 2^(k-1), reported as a table of mean gaps.
struct Lemma31Item {
    bool pass = true;
    std::size_t violations = 0;
    double worst_margin = 0.0; // most positive excess over the allowed bound
};

struct ConvergenceRow {
    double index = 0.0;
    double delta = 0.0;
    double mean_gap = 0.0;
    double max_gap = 0.0;
};

struct Lemma31Report {
    Lemma31Item bound;
    Lemma31Item monotone;
    Lemma31Item lipschitz;
    std::vector<ConvergenceRow> convergence;
    bool convergence_pass = true;
    bool all_pass() const {
        return bound.pass && monotone.pass && lipschitz.pass && convergence_pass;
    }
};

struct Lemma31Config {
    SearchParams search{65, 12};
    std::size_t dimension = 1;
    double y_range = 2.0;
    double z_range = 2.0;
    double t_max = 1.0;
    double state_range = 1.0;
    // Absolute slack added on top of the propagated grid tolerances; covers
    // the residual search error near cusps of merely-continuous bases.
    double check_slack = 1e-5;
    std::size_t convergence_rows = 8;
};

Lemma31Report lemma31_suite(const GeneratorSpec& base, std::span<const double> indices,
                            std::size_t samples, std::uint64_t seed, Lemma31Config cfg = {});

} // namespace bsde
