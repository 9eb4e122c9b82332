#include "bsde/time_grid.hpp"

#include <cmath>
#include <string>

#include "bsde/errors.hpp"

namespace bsde {

std::vector<double> TimeGrid::nodes() const {
    std::vector<double> out(steps + 1);
    for (std::size_t i = 0; i <= steps; ++i) out[i] = node(i);
    return out;
}

TimeGrid make_grid(double horizon, std::size_t steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("grid horizon T must be positive and finite, got " + std::to_string(horizon));
    if (steps == 0)
        throw ConfigError("grid step count N must be at least 1");
    return TimeGrid{horizon, steps};
}

} // namespace bsde
