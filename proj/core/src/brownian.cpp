#include "bsde/brownian.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>
#include <istream>

#include "bsde/errors.hpp"
#include "bsde/parallel.hpp"
#include "bsde/rng.hpp"

namespace bsde {

BrownianBatch::BrownianBatch(TimeGrid grid, std::size_t dimension, std::size_t paths,
                             std::uint64_t seed, std::vector<double> increments)
    : grid_(grid), d_(dimension), paths_(paths), seed_(seed), dw_(std::move(increments)) {
    if (dw_.size() != paths_ * grid_.steps * d_)
        throw ConfigError("increment buffer size does not match (M, N, d)");
}

std::vector<double> BrownianBatch::level(std::size_t m, std::size_t i) const {
    std::vector<double> w(d_, 0.0);
    for (std::size_t j = 0; j < i; ++j) {
        std::span<const double> inc = increment(m, j);
        for (std::size_t k = 0; k < d_; ++k) w[k] += inc[k];
    }
    return w;
}

std::vector<double> BrownianBatch::path_levels(std::size_t m) const {
    const std::size_t n = grid_.steps;
    std::vector<double> levels((n + 1) * d_, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        std::span<const double> inc = increment(m, i);
        for (std::size_t k = 0; k < d_; ++k)
            levels[(i + 1) * d_ + k] = levels[i * d_ + k] + inc[k];
    }
    return levels;
}

BrownianBatch simulate_paths(const TimeGrid& grid, std::size_t dimension,
                             std::size_t paths, std::uint64_t seed,
                             unsigned threads) {
    if (grid.steps == 0 || !(grid.horizon > 0.0))
        throw ConfigError("simulate_paths requires a valid grid");
    if (dimension == 0) throw ConfigError("simulate_paths requires d >= 1");
    if (paths == 0) throw ConfigError("simulate_paths requires M >= 1");

    const std::size_t n = grid.steps;
    const double sqrt_dt = std::sqrt(grid.dt());
    std::vector<double> dw(paths * n * dimension);
    parallel_for(paths, threads, [&](std::size_t m) {
        double* row = dw.data() + m * n * dimension;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < dimension; ++k)
                row[i * dimension + k] = sqrt_dt * normal_draw(seed, m, i * dimension + k);
    });
    return BrownianBatch(grid, dimension, paths, seed, std::move(dw));
}

std::vector<double> path_value(const BrownianBatch& batch, std::size_t m, std::size_t i) {
    if (m >= batch.paths())
        throw std::out_of_range("path index " + std::to_string(m) + " out of range (M = " +
                                std::to_string(batch.paths()) + ")");
    if (i > batch.grid().steps)
        throw std::out_of_range("time index " + std::to_string(i) + " out of range (N = " +
                                std::to_string(batch.grid().steps) + ")");
    return batch.level(m, i);
}

namespace {

constexpr char kMagic[4] = {'B', 'S', 'D', 'E'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) {
    std::uint64_t bits = get_u64(in);
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
}

} // namespace

void write_batch(const BrownianBatch& batch, std::ostream& out) {
    out.write(kMagic, 4);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(batch.dimension()));
    put_u64(out, static_cast<std::uint64_t>(batch.paths()));
    put_u32(out, static_cast<std::uint32_t>(batch.grid().steps));
    put_f64(out, batch.grid().horizon);
    put_u64(out, batch.seed());
    for (double v : batch.raw_increments()) put_f64(out, v);
    if (!out) throw NumericError("failed to write batch dump");
}

void write_batch_file(const BrownianBatch& batch, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    write_batch(batch, out);
}

BrownianBatch read_batch(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0)
        throw ConfigError("not a batch dump: bad magic");
    std::uint32_t version = get_u32(in);
    if (version != kVersion)
        throw ConfigError("unsupported batch dump version " + std::to_string(version));
    std::size_t d = get_u32(in);
    std::size_t paths = static_cast<std::size_t>(get_u64(in));
    std::size_t n = get_u32(in);
    double horizon = get_f64(in);
    std::uint64_t seed = get_u64(in);
    TimeGrid grid = make_grid(horizon, n);
    std::vector<double> dw(paths * n * d);
    for (double& v : dw) v = get_f64(in);
    if (!in) throw ConfigError("truncated batch dump");
    return BrownianBatch(grid, d, paths, seed, std::move(dw));
}

BrownianBatch read_batch_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    return read_batch(in);
}

} // namespace bsde
