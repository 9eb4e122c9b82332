#pragma once

#include <cstddef>
#include <vector>

namespace bsde {

/// Uniform time grid t_i = i*T/N on [0, T].
struct TimeGrid {
    double horizon = 0.0;
    std::size_t steps = 0;

    double dt() const { return horizon / static_cast<double>(steps); }
    double node(std::size_t i) const { return horizon * static_cast<double>(i) / static_cast<double>(steps); }
    std::vector<double> nodes() const;

    bool operator==(const TimeGrid&) const = default;
};

/// Builds a uniform grid; rejects non-positive T or N = 0.
TimeGrid make_grid(double horizon, std::size_t steps);

} // namespace bsde
