#include "bsde/generator.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "bsde/errors.hpp"
#include "bsde/rng.hpp"

namespace bsde {

double znorm(std::span<const double> z) {
    double s = 0.0;
    for (double v : z) s += v * v;
    return std::sqrt(s);
}

LpConfig make_lp_config(double p) {
    if (!(p > 1.0)) throw ConfigError("p must exceed 1, got " + std::to_string(p));
    return LpConfig{p};
}

namespace {

void require_arity(const std::string& name, std::span<const double> params, std::size_t n) {
    if (params.size() != n)
        throw ConfigError("generator/terminal '" + name + "' expects " + std::to_string(n) +
                          " parameter(s), got " + std::to_string(params.size()));
}

GeneratorSpec::Bound const_bound(double c) {
    return [c](double, std::span<const double>) { return c; };
}

} // namespace

GeneratorSpec make_builtin_generator(const std::string& name, std::span<const double> params) {
    GeneratorSpec spec;
    spec.name = name;
    if (name == "zero") {
        require_arity(name, params, 0);
        spec.eval = [](double, std::span<const double>, double, std::span<const double>) { return 0.0; };
        spec.growth_K = 0.0;
        spec.bound_g = const_bound(0.0);
        spec.lipschitz_const = 0.0;
        spec.depends_on_y = spec.depends_on_z = false;
    } else if (name == "constant") {
        require_arity(name, params, 1);
        const double c = params[0];
        spec.eval = [c](double, std::span<const double>, double, std::span<const double>) { return c; };
        spec.growth_K = 0.0;
        spec.bound_g = const_bound(std::fabs(c));
        spec.lipschitz_const = 0.0;
        spec.depends_on_y = spec.depends_on_z = false;
    } else if (name == "linear_y") {
        require_arity(name, params, 1);
        const double a = params[0];
        spec.eval = [a](double, std::span<const double>, double y, std::span<const double>) { return a * y; };
        spec.growth_K = std::fabs(a);
        spec.bound_g = const_bound(0.0);
        spec.lipschitz_const = std::fabs(a);
        spec.depends_on_y = true;
        spec.depends_on_z = false;
    } else if (name == "linear_z") {
        require_arity(name, params, 1);
        const double b = params[0];
        spec.eval = [b](double, std::span<const double>, double, std::span<const double> z) {
            return b * z[0];
        };
        spec.growth_K = std::fabs(b);
        spec.bound_g = const_bound(0.0);
        spec.lipschitz_const = std::fabs(b);
        spec.depends_on_y = false;
        spec.depends_on_z = true;
    } else if (name == "affine") {
        require_arity(name, params, 3);
        const double a = params[0], b = params[1], c = params[2];
        spec.eval = [a, b, c](double, std::span<const double>, double y, std::span<const double> z) {
            return a * y + b * z[0] + c;
        };
        spec.growth_K = std::max(std::fabs(a), std::fabs(b));
        spec.bound_g = const_bound(std::fabs(c));
        spec.lipschitz_const = std::fabs(a) + std::fabs(b);
        spec.depends_on_y = std::fabs(a) > 0.0;
        spec.depends_on_z = std::fabs(b) > 0.0;
    } else if (name == "sqrt_y") {
        require_arity(name, params, 0);
        // sqrt|y| <= 1 + |y|, so g == 1 and K = 1; continuous but not Lipschitz.
        spec.eval = [](double, std::span<const double>, double y, std::span<const double>) {
            return std::sqrt(std::fabs(y));
        };
        spec.growth_K = 1.0;
        spec.bound_g = const_bound(1.0);
        spec.depends_on_y = true;
        spec.depends_on_z = false;
    } else if (name == "sqrt_z") {
        require_arity(name, params, 0);
        spec.eval = [](double, std::span<const double>, double, std::span<const double> z) {
            return std::sqrt(znorm(z));
        };
        spec.growth_K = 1.0;
        spec.bound_g = const_bound(1.0);
        spec.depends_on_y = false;
        spec.depends_on_z = true;
    } else if (name == "lsm_example") {
        // Linear pricing driver f(y, z) = -(r*y + theta*z_1).
        require_arity(name, params, 2);
        const double r = params[0], theta = params[1];
        spec.eval = [r, theta](double, std::span<const double>, double y, std::span<const double> z) {
            return -(r * y + theta * z[0]);
        };
        spec.growth_K = std::max(std::fabs(r), std::fabs(theta));
        spec.bound_g = const_bound(0.0);
        spec.lipschitz_const = std::fabs(r) + std::fabs(theta);
        spec.depends_on_y = std::fabs(r) > 0.0;
        spec.depends_on_z = std::fabs(theta) > 0.0;
    } else {
        throw ConfigError("unknown generator '" + name + "'");
    }
    return spec;
}

TerminalSpec make_terminal(const std::string& name, std::span<const double> params) {
    TerminalSpec terminal;
    terminal.name = name;
    if (name == "w_T") {
        require_arity(name, params, 0);
        terminal.phi = [](const TerminalSpec::Args& a) { return a.terminal_state[0]; };
    } else if (name == "abs_w_T") {
        require_arity(name, params, 0);
        terminal.phi = [](const TerminalSpec::Args& a) { return std::fabs(a.terminal_state[0]); };
    } else if (name == "bounded_call") {
        require_arity(name, params, 2);
        const double strike = params[0], cap = params[1];
        terminal.phi = [strike, cap](const TerminalSpec::Args& a) {
            return std::min(std::max(a.terminal_state[0] - strike, 0.0), cap);
        };
    } else if (name == "constant") {
        require_arity(name, params, 1);
        const double c = params[0];
        terminal.phi = [c](const TerminalSpec::Args&) { return c; };
    } else {
        throw ConfigError("unknown terminal '" + name + "'");
    }
    return terminal;
}

GrowthReport verify_linear_growth(const GeneratorSpec& spec, const PointSampler& sampler,
                                  std::size_t count) {
    if (count == 0) throw ConfigError("verify_linear_growth requires count >= 1");
    GrowthReport report;
    report.checked = count;
    for (std::size_t i = 0; i < count; ++i) {
        SamplePoint pt = sampler();
        const double f = spec(pt.t, pt.state, pt.y, pt.z);
        const double bound = spec.g(pt.t, pt.state) + spec.growth_K * (std::fabs(pt.y) + znorm(pt.z));
        if (std::fabs(f) > bound)
            report.violations.push_back({std::move(pt), f, bound, std::fabs(f) - bound});
    }
    return report;
}

GrowthReport verify_lipschitz(const GeneratorSpec& spec, const PointSampler& sampler,
                              std::size_t count) {
    if (!spec.lipschitz_const)
        throw ConfigError("verify_lipschitz requires a generator with lipschitz_const");
    if (count == 0) throw ConfigError("verify_lipschitz requires count >= 1");
    const double lip = *spec.lipschitz_const;
    GrowthReport report;
    report.checked = count;
    for (std::size_t i = 0; i < count; ++i) {
        SamplePoint p1 = sampler();
        SamplePoint p2 = sampler();
        p2.t = p1.t;
        p2.state = p1.state;
        const double f1 = spec(p1.t, p1.state, p1.y, p1.z);
        const double f2 = spec(p2.t, p2.state, p2.y, p2.z);
        std::vector<double> dz(p1.z.size());
        for (std::size_t k = 0; k < dz.size(); ++k) dz[k] = p1.z[k] - p2.z[k];
        const double dist = std::fabs(p1.y - p2.y) + znorm(dz);
        const double allowed = lip * dist + 1e-12 * (1.0 + std::fabs(f1) + std::fabs(f2));
        if (std::fabs(f1 - f2) > allowed)
            report.violations.push_back({std::move(p1), f1 - f2, allowed, std::fabs(f1 - f2) - allowed});
    }
    return report;
}

PointSampler make_uniform_sampler(std::uint64_t seed, std::size_t dimension, double y_range,
                                  double z_range, double t_max, double state_range) {
    auto counter = std::make_shared<std::uint64_t>(0);
    return [=]() {
        SamplePoint pt;
        std::uint64_t base = (*counter)++;
        auto u = [&](std::uint64_t slot) {
            return uniform_from_word(counter_word(seed, base, slot));
        };
        pt.t = t_max * u(0);
        pt.y = y_range * (2.0 * u(1) - 1.0);
        pt.state.resize(dimension);
        pt.z.resize(dimension);
        for (std::size_t k = 0; k < dimension; ++k) {
            pt.state[k] = state_range * (2.0 * u(2 + 2 * k) - 1.0);
            pt.z[k] = z_range * (2.0 * u(3 + 2 * k) - 1.0);
        }
        return pt;
    };
}

double estimate_terminal_moment(const TerminalSpec& terminal, const TimeGrid& grid,
                                std::size_t dimension, double p, std::size_t paths,
                                std::uint64_t seed) {
    BrownianBatch batch = simulate_paths(grid, dimension, paths, seed);
    double sum = 0.0;
    for (std::size_t m = 0; m < paths; ++m) {
        std::vector<double> terminal_state = batch.level(m, grid.steps);
        const double xi = terminal({terminal_state, &batch, m});
        sum += std::pow(std::fabs(xi), p);
    }
    return sum / static_cast<double>(paths);
}

MomentStability terminal_moment_stability(const TerminalSpec& terminal, const TimeGrid& grid,
                                          std::size_t dimension, double p, std::size_t paths,
                                          std::uint64_t seed, double drift_tolerance) {
    MomentStability result;
    result.moment_at_m = estimate_terminal_moment(terminal, grid, dimension, p, paths, seed);
    result.moment_at_2m = estimate_terminal_moment(terminal, grid, dimension, p, 2 * paths, seed);
    const double scale = std::max({std::fabs(result.moment_at_m), std::fabs(result.moment_at_2m), 1e-12});
    result.relative_drift = std::fabs(result.moment_at_2m - result.moment_at_m) / scale;
    result.stable = std::isfinite(result.moment_at_m) && std::isfinite(result.moment_at_2m) &&
                    result.relative_drift <= drift_tolerance;
    return result;
}

} // namespace bsde
