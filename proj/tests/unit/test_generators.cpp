#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "bsde/errors.hpp"
#include "bsde/generator.hpp"
#include "oracles.hpp"

using namespace bsde;

namespace {

double eval1(const GeneratorSpec& g, double y, double z1, double t = 0.0) {
    const std::vector<double> state{0.0};
    const std::vector<double> z{z1};
    return g(t, state, y, z);
}

const std::vector<std::pair<std::string, std::vector<double>>> kZoo = {
    {"zero", {}},        {"constant", {0.7}}, {"linear_y", {1.5}}, {"linear_z", {-0.8}},
    {"affine", {0.5, -0.25, 1.0}}, {"sqrt_y", {}}, {"sqrt_z", {}}, {"lsm_example", {0.05, 0.3}},
};

} // namespace

TEST_CASE("builtin metadata") {
    GeneratorSpec zero = make_builtin_generator("zero", {});
    CHECK(eval1(zero, 3.0, -2.0) == 0.0);
    CHECK(zero.growth_K == 0.0);
    CHECK(zero.g(0.0, std::vector<double>{0.0}) == 0.0);
    CHECK(zero.lipschitz_const.value() == 0.0);

    std::vector<double> one{1.0};
    GeneratorSpec lin = make_builtin_generator("linear_y", one);
    CHECK(eval1(lin, 2.5, 9.0) == 2.5);
    CHECK(lin.growth_K == 1.0);
    CHECK(lin.lipschitz_const.value() == 1.0);

    GeneratorSpec sq = make_builtin_generator("sqrt_y", {});
    CHECK(eval1(sq, 4.0, 0.0) == 2.0);
    CHECK(2.0 <= 1.0 + 1.0 * 4.0); // the (H1) bound at y = 4
    CHECK(!sq.lipschitz_const.has_value());

    std::vector<double> abc{0.5, -0.25, 1.0};
    GeneratorSpec aff = make_builtin_generator("affine", abc);
    CHECK(aff.lipschitz_const.value() == doctest::Approx(0.75));
    CHECK(aff.growth_K == doctest::Approx(0.5));
}

TEST_CASE("unknown names and wrong arity are rejected") {
    CHECK_THROWS_AS(make_builtin_generator("cubic", {}), ConfigError);
    std::vector<double> two{1.0, 2.0};
    CHECK_THROWS_AS(make_builtin_generator("linear_y", two), ConfigError);
    CHECK_THROWS_AS(make_builtin_generator("zero", two), ConfigError);
    CHECK_THROWS_AS(make_terminal("parabola", {}), ConfigError);
    CHECK_THROWS_AS(make_terminal("constant", {}), ConfigError);
}

TEST_CASE("generator evaluation is pure") {
    GeneratorSpec sq = make_builtin_generator("sqrt_y", {});
    const double first = eval1(sq, 0.3, 0.1);
    for (int rep = 0; rep < 5; ++rep) CHECK(eval1(sq, 0.3, 0.1) == first);
}

TEST_CASE("every builtin passes the growth check with its own metadata") {
    for (const auto& [name, params] : kZoo) {
        GeneratorSpec spec = make_builtin_generator(name, params);
        PointSampler sampler = make_uniform_sampler(101, 1, 1e3, 1e3);
        GrowthReport report = verify_linear_growth(spec, sampler, 100000);
        INFO("generator ", name);
        CHECK(report.clean());
        CHECK(report.checked == 100000);
    }
}

TEST_CASE("Lipschitz builtins pass the sampled increment check at their declared L") {
    for (const auto& [name, params] : kZoo) {
        GeneratorSpec spec = make_builtin_generator(name, params);
        if (!spec.lipschitz_const) continue;
        PointSampler sampler = make_uniform_sampler(202, 1, 50.0, 50.0);
        GrowthReport report = verify_lipschitz(spec, sampler, 10000);
        INFO("generator ", name);
        CHECK(report.clean());
    }
}

TEST_CASE("sqrt_y growth bound holds analytically on a brute sample") {
    // sqrt|y| <= 1 + |y| spot-checked independently of the GrowthReport path.
    for (int j = -1000; j <= 1000; ++j) {
        const double y = static_cast<double>(j);
        CHECK(std::sqrt(std::fabs(y)) <= 1.0 + std::fabs(y));
    }
    GeneratorSpec sq = make_builtin_generator("sqrt_y", {});
    GrowthReport report = verify_linear_growth(sq, make_uniform_sampler(7, 1, 1e3, 1e3), 10000);
    CHECK(report.clean());
}

TEST_CASE("a mislabeled driver produces a nonempty violation report") {
    std::vector<double> two{2.0};
    GeneratorSpec spec = make_builtin_generator("linear_y", two);
    spec.growth_K = 1.0; // deliberately wrong: |2y| > 0 + 1*|y| for y != 0
    spec.bound_g = [](double, std::span<const double>) { return 0.0; };

    // Fixed point list including y = 1, where |f| = 2 exceeds the claimed bound 1.
    auto counter = std::make_shared<std::size_t>(0);
    PointSampler sampler = [counter]() {
        static const double ys[] = {0.0, 1.0, -3.0, 0.5};
        SamplePoint pt;
        pt.y = ys[(*counter)++ % 4];
        pt.state = {0.0};
        pt.z = {0.0};
        return pt;
    };
    GrowthReport report = verify_linear_growth(spec, sampler, 8);
    REQUIRE(!report.clean());
    bool found_y1 = false;
    for (const GrowthViolation& v : report.violations)
        if (v.point.y == 1.0) {
            found_y1 = true;
            CHECK(v.margin == doctest::Approx(1.0)); // |f| - bound = 2 - 1
        }
    CHECK(found_y1);
}

TEST_CASE("terminal builtins") {
    std::vector<double> c1{1.0};
    TerminalSpec constant = make_terminal("constant", c1);
    std::vector<double> state{0.4};
    CHECK(constant({state, nullptr, 0}) == 1.0);

    TerminalSpec wt = make_terminal("w_T", {});
    CHECK(wt({state, nullptr, 0}) == 0.4);

    TerminalSpec awt = make_terminal("abs_w_T", {});
    std::vector<double> neg{-0.4};
    CHECK(awt({neg, nullptr, 0}) == 0.4);

    std::vector<double> kc{0.2, 1.5};
    TerminalSpec call = make_terminal("bounded_call", kc);
    std::vector<double> big{9.0};
    CHECK(call({big, nullptr, 0}) == 1.5);   // capped
    CHECK(call({state, nullptr, 0}) == doctest::Approx(0.2));
    CHECK(call({neg, nullptr, 0}) == 0.0);
}

TEST_CASE("constant terminal has unit p-th moment for all p") {
    std::vector<double> c1{1.0};
    TerminalSpec constant = make_terminal("constant", c1);
    TimeGrid grid = make_grid(1.0, 4);
    for (double p : {1.5, 2.0, 3.0})
        CHECK(estimate_terminal_moment(constant, grid, 1, p, 200, 3) == doctest::Approx(1.0));
}

TEST_CASE("w_T second moment matches E W_T^2 = T") {
    TerminalSpec wt = make_terminal("w_T", {});
    TimeGrid grid = make_grid(1.0, 8);
    const std::size_t m_paths = 100000;
    const double mc = estimate_terminal_moment(wt, grid, 1, 2.0, m_paths, 31);
    // Var(W_T^2) = 2 T^2.
    const double se = std::sqrt(2.0 / static_cast<double>(m_paths));
    CHECK(std::fabs(mc - 1.0) < 3.0 * se);
}

TEST_CASE("abs_w_T first moment matches the half-normal mean via quadrature") {
    const double by_quadrature =
        oracles::gaussian_expectation([](double x) { return std::fabs(x); }, 1.0);
    CHECK(by_quadrature == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-8));
    CHECK(by_quadrature == doctest::Approx(0.7979).epsilon(1e-4));

    TerminalSpec awt = make_terminal("abs_w_T", {});
    TimeGrid grid = make_grid(1.0, 8);
    const std::size_t m_paths = 100000;
    const double mc = estimate_terminal_moment(awt, grid, 1, 1.0, m_paths, 37);
    const double var = 1.0 - 2.0 / M_PI;
    const double se = std::sqrt(var / static_cast<double>(m_paths));
    CHECK(std::fabs(mc - by_quadrature) < 3.0 * se);
}

TEST_CASE("terminal moments are stable under doubling M") {
    TimeGrid grid = make_grid(1.0, 8);
    for (const char* name : {"w_T", "abs_w_T"}) {
        TerminalSpec term = make_terminal(name, {});
        MomentStability st = terminal_moment_stability(term, grid, 1, 3.0, 20000, 41);
        INFO("terminal ", name);
        CHECK(st.stable);
    }
}

TEST_CASE("LpConfig enforces p > 1") {
    CHECK(make_lp_config(1.5).p == 1.5);
    CHECK_THROWS_AS(make_lp_config(1.0), ConfigError);
    CHECK_THROWS_AS(make_lp_config(0.5), ConfigError);
}
