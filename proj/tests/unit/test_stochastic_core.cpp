#include <doctest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "bsde/brownian.hpp"
#include "bsde/errors.hpp"
#include "bsde/rng.hpp"
#include "bsde/time_grid.hpp"

using namespace bsde;

TEST_CASE("make_grid builds uniform grids") {
    TimeGrid g1 = make_grid(1.0, 1);
    CHECK(g1.nodes() == std::vector<double>{0.0, 1.0});
    CHECK(g1.dt() == 1.0);

    TimeGrid g2 = make_grid(2.0, 4);
    CHECK(g2.nodes() == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
    CHECK(g2.dt() == 0.5);
}

TEST_CASE("make_grid rejects bad arguments") {
    CHECK_THROWS_AS(make_grid(1.0, 0), ConfigError);
    CHECK_THROWS_AS(make_grid(0.0, 4), ConfigError);
    CHECK_THROWS_AS(make_grid(-1.0, 4), ConfigError);
}

TEST_CASE("normal_quantile matches known values") {
    CHECK(normal_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(normal_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-9));
    CHECK(normal_quantile(0.025) == doctest::Approx(-1.959963984540054).epsilon(1e-9));
    CHECK(normal_quantile(1e-10) < -6.0);
}

TEST_CASE("increments pass the mean check at 3 sigma") {
    const std::size_t m_paths = 100000;
    TimeGrid grid = make_grid(1.0, 1);
    BrownianBatch batch = simulate_paths(grid, 1, m_paths, 7);
    double sum = 0.0;
    for (std::size_t m = 0; m < m_paths; ++m) sum += batch.increment(m, 0)[0];
    const double mean = sum / static_cast<double>(m_paths);
    const double se = std::sqrt(grid.dt() / static_cast<double>(m_paths));
    CHECK(std::fabs(mean) < 3.0 * se);
}

TEST_CASE("increments pass the variance check at 3 sigma per step and coordinate") {
    const std::size_t m_paths = 100000;
    TimeGrid grid = make_grid(1.0, 4);
    BrownianBatch batch = simulate_paths(grid, 2, m_paths, 11);
    const double dt = grid.dt();
    const double se = dt * std::sqrt(2.0 / static_cast<double>(m_paths - 1));
    for (std::size_t i = 0; i < 4; ++i) {
        for (std::size_t k = 0; k < 2; ++k) {
            double sum = 0.0, sum_sq = 0.0;
            for (std::size_t m = 0; m < m_paths; ++m) {
                const double v = batch.increment(m, i)[k];
                sum += v;
                sum_sq += v * v;
            }
            const double mean = sum / static_cast<double>(m_paths);
            const double var =
                (sum_sq - static_cast<double>(m_paths) * mean * mean) /
                static_cast<double>(m_paths - 1);
            CHECK(std::fabs(var - dt) < 3.0 * se);
        }
    }
}

TEST_CASE("quadratic variation concentrates at d T") {
    const std::size_t m_paths = 100000;
    TimeGrid grid = make_grid(1.0, 8);
    const std::size_t d = 2;
    BrownianBatch batch = simulate_paths(grid, d, m_paths, 17);
    double qv_sum = 0.0;
    for (std::size_t m = 0; m < m_paths; ++m)
        for (std::size_t i = 0; i < grid.steps; ++i)
            for (double v : batch.increment(m, i)) qv_sum += v * v;
    const double qv_mean = qv_sum / static_cast<double>(m_paths);
    const double expected = static_cast<double>(d) * grid.horizon;
    const double se = grid.dt() * std::sqrt(2.0 * static_cast<double>(grid.steps * d) /
                                            static_cast<double>(m_paths));
    CHECK(std::fabs(qv_mean - expected) < 3.0 * se);
}

TEST_CASE("simulation is bit-identical across thread counts") {
    TimeGrid grid = make_grid(2.0, 16);
    BrownianBatch a = simulate_paths(grid, 3, 999, 42, 1);
    BrownianBatch b = simulate_paths(grid, 3, 999, 42, 7);
    BrownianBatch c = simulate_paths(grid, 3, 999, 42, 2);
    REQUIRE(a.raw_increments().size() == b.raw_increments().size());
    CHECK(std::memcmp(a.raw_increments().data(), b.raw_increments().data(),
                      a.raw_increments().size() * sizeof(double)) == 0);
    CHECK(std::memcmp(a.raw_increments().data(), c.raw_increments().data(),
                      a.raw_increments().size() * sizeof(double)) == 0);
}

TEST_CASE("path subsets are reproducible in isolation") {
    TimeGrid grid = make_grid(1.0, 4);
    BrownianBatch big = simulate_paths(grid, 2, 50, 5);
    BrownianBatch small = simulate_paths(grid, 2, 10, 5);
    for (std::size_t m = 0; m < 10; ++m)
        for (std::size_t i = 0; i < 4; ++i) {
            auto bi = big.increment(m, i);
            auto si = small.increment(m, i);
            CHECK(bi[0] == si[0]);
            CHECK(bi[1] == si[1]);
        }
}

TEST_CASE("path_value telescopes the increments") {
    TimeGrid grid = make_grid(1.0, 2);
    BrownianBatch batch = simulate_paths(grid, 1, 3, 9);
    for (std::size_t m = 0; m < 3; ++m) {
        CHECK(path_value(batch, m, 0) == std::vector<double>{0.0});
        const double a = batch.increment(m, 0)[0];
        const double b = batch.increment(m, 1)[0];
        CHECK(path_value(batch, m, 2)[0] == doctest::Approx(a + b).epsilon(1e-15));
    }
    CHECK_THROWS_AS(path_value(batch, 3, 0), std::out_of_range);
    CHECK_THROWS_AS(path_value(batch, 0, 3), std::out_of_range);
}

TEST_CASE("path_levels agrees with per-node levels") {
    TimeGrid grid = make_grid(1.5, 6);
    BrownianBatch batch = simulate_paths(grid, 2, 4, 21);
    for (std::size_t m = 0; m < 4; ++m) {
        std::vector<double> levels = batch.path_levels(m);
        for (std::size_t i = 0; i <= 6; ++i) {
            std::vector<double> w = batch.level(m, i);
            CHECK(levels[i * 2 + 0] == w[0]);
            CHECK(levels[i * 2 + 1] == w[1]);
        }
    }
}

TEST_CASE("binary dump round-trips and carries the BSDE magic") {
    TimeGrid grid = make_grid(0.75, 5);
    BrownianBatch batch = simulate_paths(grid, 2, 7, 1234);
    std::ostringstream out(std::ios::binary);
    write_batch(batch, out);
    const std::string bytes = out.str();
    REQUIRE(bytes.size() >= 4);
    CHECK(bytes.substr(0, 4) == "BSDE");

    std::istringstream in(bytes, std::ios::binary);
    BrownianBatch loaded = read_batch(in);
    CHECK(loaded.id() == batch.id());
    CHECK(loaded.raw_increments() == batch.raw_increments());
}

TEST_CASE("dump rejects foreign bytes") {
    std::istringstream in("NOPE-not-a-batch", std::ios::binary);
    CHECK_THROWS_AS(read_batch(in), ConfigError);
}
