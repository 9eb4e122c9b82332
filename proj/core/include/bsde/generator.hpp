#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsde/brownian.hpp"
#include "bsde/time_grid.hpp"

namespace bsde {

/// Euclidean norm of a z-vector; increments in (y, z) are measured
/// as |dy| + |dz| throughout.
double znorm(std::span<const double> z);

/// A sampled argument point (t, state, y, z) for generator checks.
struct SamplePoint {
    double t = 0.0;
    std::vector<double> state; // current Brownian value W_t
    double y = 0.0;
    std::vector<double> z;
};

/// Generator f(t, W_t, y, z) with its linear-growth metadata: the constant K
/// and the bound process g(t, W_t) with |f| <= g + K(|y| + |z|). Lipschitz
/// generators also carry lipschitz_const. Evaluation must be pure; instances
/// are immutable and freely shared across threads.
struct GeneratorSpec {
    using Eval = std::function<double(double t, std::span<const double> state, double y,
                                      std::span<const double> z)>;
    using Bound = std::function<double(double t, std::span<const double> state)>;

    Eval eval;
    double growth_K = 0.0;
    Bound bound_g;
    std::optional<double> lipschitz_const;
    // Which arguments f truly depends on; collapses envelope searches to those axes.
    bool depends_on_y = true;
    bool depends_on_z = true;
    std::string name = "custom";

    double operator()(double t, std::span<const double> state, double y,
                      std::span<const double> z) const {
        return eval(t, state, y, z);
    }
    double g(double t, std::span<const double> state) const { return bound_g(t, state); }
};

/// Terminal condition xi = phi(W_T) with optional access to the whole
/// discrete path. All builtins use the terminal state only.
struct TerminalSpec {
    struct Args {
        std::span<const double> terminal_state;
        const BrownianBatch* batch = nullptr; // full-path access, may be null
        std::size_t path_index = 0;
    };

    std::function<double(const Args&)> phi;
    std::string name = "custom";

    double operator()(const Args& args) const { return phi(args); }
};

/// Integrability exponent; the theory needs p strictly above 1.
struct LpConfig {
    double p;
};

LpConfig make_lp_config(double p);

/// Builtin generator zoo. Names: zero, constant (c), linear_y (a), linear_z (b),
/// affine (a, b, c), sqrt_y, sqrt_z, lsm_example (r, theta).
GeneratorSpec make_builtin_generator(const std::string& name, std::span<const double> params);

/// Builtin terminal conditions. Names: w_T, abs_w_T, bounded_call (k, cap), constant (c).
TerminalSpec make_terminal(const std::string& name, std::span<const double> params);

/// One sampled violation of |f| <= g + K(|y| + |z|).
struct GrowthViolation {
    SamplePoint point;
    double f_value = 0.0;
    double bound = 0.0;
    double margin = 0.0; // |f| - bound, positive
};

struct GrowthReport {
    std::size_t checked = 0;
    std::vector<GrowthViolation> violations;
    bool clean() const { return violations.empty(); }
};

using PointSampler = std::function<SamplePoint()>;

/// Checks the linear-growth bound on `count` sampled points. Violations are
/// data, not errors.
GrowthReport verify_linear_growth(const GeneratorSpec& spec, const PointSampler& sampler,
                                  std::size_t count);

/// Checks |f(P1) - f(P2)| <= L (|y1-y2| + |z1-z2|) on sampled pairs; requires
/// spec.lipschitz_const.
GrowthReport verify_lipschitz(const GeneratorSpec& spec, const PointSampler& sampler,
                              std::size_t count);

/// Uniform sampler over |y| <= y_range, |z_k| <= z_range, t in [0, t_max],
/// state coordinates in [-state_range, state_range]. Deterministic in seed.
PointSampler make_uniform_sampler(std::uint64_t seed, std::size_t dimension, double y_range,
                                  double z_range, double t_max = 1.0, double state_range = 3.0);

/// Heuristic check of terminal p-integrability: the Monte Carlo estimate of
/// E|xi|^p should be stable under doubling M. Not a proof, reported as such.
struct MomentStability {
    double moment_at_m = 0.0;
    double moment_at_2m = 0.0;
    double relative_drift = 0.0;
    bool stable = false;
};

MomentStability terminal_moment_stability(const TerminalSpec& terminal, const TimeGrid& grid,
                                          std::size_t dimension, double p, std::size_t paths,
                                          std::uint64_t seed, double drift_tolerance = 0.2);

/// Monte Carlo estimate of E|xi|^p on a fresh batch.
double estimate_terminal_moment(const TerminalSpec& terminal, const TimeGrid& grid,
                                std::size_t dimension, double p, std::size_t paths,
                                std::uint64_t seed);

} // namespace bsde
