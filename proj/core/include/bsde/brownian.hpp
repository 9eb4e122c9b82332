#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bsde/time_grid.hpp"

namespace bsde {

/// Identity of a simulated batch. Two batches with equal ids hold bit-identical
/// increments, so coupled-path diagnostics compare ids rather than buffers.
struct BatchId {
    std::uint64_t seed = 0;
    std::size_t dimension = 0;
    std::size_t paths = 0;
    TimeGrid grid;

    bool operator==(const BatchId&) const = default;
};

/// M seeded discrete d-dimensional Brownian paths on a uniform grid.
/// Increments are stored; levels are reconstructed on demand and satisfy
/// W[m][0] = 0. Immutable after creation and shareable across threads.
class BrownianBatch {
public:
    BrownianBatch(TimeGrid grid, std::size_t dimension, std::size_t paths,
                  std::uint64_t seed, std::vector<double> increments);

    const TimeGrid& grid() const { return grid_; }
    std::size_t dimension() const { return d_; }
    std::size_t paths() const { return paths_; }
    std::uint64_t seed() const { return seed_; }
    BatchId id() const { return BatchId{seed_, d_, paths_, grid_}; }

    /// Increment vector ΔW[m][i], length d.
    std::span<const double> increment(std::size_t m, std::size_t i) const {
        return {dw_.data() + (m * grid_.steps + i) * d_, d_};
    }
    const std::vector<double>& raw_increments() const { return dw_; }

    /// Path level W[m][i] = sum of increments j < i, accumulated in j order.
    std::vector<double> level(std::size_t m, std::size_t i) const;

    /// All levels of one path, row i holding W[m][i]; (N+1) x d, row-major.
    std::vector<double> path_levels(std::size_t m) const;

private:
    TimeGrid grid_;
    std::size_t d_;
    std::size_t paths_;
    std::uint64_t seed_;
    std::vector<double> dw_; // (m * N + i) * d + k
};

/// Simulates a batch. Each increment coordinate is drawn from the counter
/// stream (seed, path index, step*d + coord), so any path subset is
/// reproducible in isolation and output is thread-count independent.
BrownianBatch simulate_paths(const TimeGrid& grid, std::size_t dimension,
                             std::size_t paths, std::uint64_t seed,
                             unsigned threads = 0);

/// W[m][i] with bounds checking (m < M, i <= N).
std::vector<double> path_value(const BrownianBatch& batch, std::size_t m, std::size_t i);

/// Binary dump: header (magic "BSDE", version, d, M, N, T, seed), then the
/// increments as little-endian 64-bit floats in path-major order.
void write_batch(const BrownianBatch& batch, std::ostream& out);
void write_batch_file(const BrownianBatch& batch, const std::string& path);
BrownianBatch read_batch(std::istream& in);
BrownianBatch read_batch_file(const std::string& path);

} // namespace bsde
