#include <doctest.h>

#include <cmath>
#include <vector>

#include "bsde/errors.hpp"
#include "bsde/regression.hpp"
#include "bsde/rng.hpp"

using namespace bsde;

TEST_CASE("basis_size counts total-degree monomials") {
    CHECK(basis_size(0, 1) == 1);
    CHECK(basis_size(3, 1) == 4);
    CHECK(basis_size(2, 2) == 6);
    CHECK(basis_size(3, 3) == 20);
}

TEST_CASE("an exactly representable target is recovered") {
    const std::size_t m = 50;
    std::vector<double> states(m), targets(m);
    for (std::size_t i = 0; i < m; ++i) {
        states[i] = -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(m - 1);
        targets[i] = 2.0 * states[i] + 3.0;
    }
    RegressionBasis basis{1, 0.0, false};
    RegressionFit fit = condexp_regress(targets, states, 1, basis);
    REQUIRE(fit.coefficients.size() == 2);
    CHECK(fit.coefficients[0] == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(fit.coefficients[1] == doctest::Approx(2.0).epsilon(1e-10));
    for (std::size_t i = 0; i < m; ++i)
        CHECK(fit.fitted[i] == doctest::Approx(targets[i]).epsilon(1e-10));
}

TEST_CASE("constant targets are fitted exactly at any degree") {
    const std::size_t m = 64;
    std::vector<double> states(m), targets(m, 4.25);
    for (std::size_t i = 0; i < m; ++i) states[i] = std::sin(static_cast<double>(i));
    for (std::size_t degree : {0u, 2u, 5u}) {
        RegressionBasis basis{degree, 0.0, false};
        RegressionFit fit = condexp_regress(targets, states, 1, basis);
        for (double v : fit.fitted) CHECK(v == doctest::Approx(4.25).epsilon(1e-9));
    }
}

TEST_CASE("noisy quadratic is recovered within 0.05 RMS") {
    const std::size_t m = 10000;
    std::vector<double> states(m), targets(m);
    for (std::size_t i = 0; i < m; ++i) {
        states[i] = 2.0 * uniform_from_word(counter_word(123, i, 0)) - 1.0;
        const double noise = 0.1 * normal_draw(123, i, 1);
        targets[i] = states[i] * states[i] + noise;
    }
    RegressionBasis basis{2, 0.0, true};
    RegressionFit fit = condexp_regress(targets, states, 1, basis);
    double rms = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double err = fit.fitted[i] - states[i] * states[i];
        rms += err * err;
    }
    rms = std::sqrt(rms / static_cast<double>(m));
    CHECK(rms <= 0.05);
}

TEST_CASE("rank-deficient design with zero ridge instructs a positive ridge") {
    std::vector<double> states(32, 1.0); // constant feature, degree 1 -> singular
    std::vector<double> targets(32, 2.0);
    RegressionBasis basis{1, 0.0, false};
    CHECK_THROWS_WITH_AS(condexp_regress(targets, states, 1, basis),
                         doctest::Contains("ridge"), NumericError);
    // With a positive ridge the same design goes through.
    RegressionBasis ridge_basis{1, 1e-8, false};
    RegressionFit fit = condexp_regress(targets, states, 1, ridge_basis);
    CHECK(fit.fitted[0] == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("standardized constant features collapse onto the intercept") {
    std::vector<double> states(32, 5.5);
    std::vector<double> targets(32);
    for (std::size_t i = 0; i < 32; ++i) targets[i] = static_cast<double>(i % 4);
    RegressionBasis basis{3, 1e-8, true};
    RegressionFit fit = condexp_regress(targets, states, 1, basis);
    for (double v : fit.fitted) CHECK(v == doctest::Approx(1.5).epsilon(1e-8));
}

TEST_CASE("more basis functions than samples is rejected") {
    std::vector<double> states(3), targets(3);
    RegressionBasis basis{3, 1e-8, true}; // 4 basis functions, 3 samples
    CHECK_THROWS_AS(condexp_regress(targets, states, 1, basis), ConfigError);
}

TEST_CASE("degree cap and negative ridge are rejected") {
    std::vector<double> states(64), targets(64);
    for (std::size_t i = 0; i < 64; ++i) states[i] = static_cast<double>(i);
    CHECK_THROWS_AS(condexp_regress(targets, states, 1, RegressionBasis{11, 0.0, false}),
                    ConfigError);
    CHECK_THROWS_AS(condexp_regress(targets, states, 1, RegressionBasis{2, -1.0, false}),
                    ConfigError);
}

TEST_CASE("standardization does not change well-conditioned fits") {
    const std::size_t m = 500;
    std::vector<double> states(m), targets(m);
    for (std::size_t i = 0; i < m; ++i) {
        states[i] = 3.0 + 2.0 * uniform_from_word(counter_word(77, i, 0));
        targets[i] = 0.3 * states[i] * states[i] - states[i] + 0.1 * normal_draw(77, i, 1);
    }
    RegressionFit raw = condexp_regress(targets, states, 1, RegressionBasis{2, 0.0, false});
    RegressionFit std_fit = condexp_regress(targets, states, 1, RegressionBasis{2, 0.0, true});
    for (std::size_t i = 0; i < m; ++i)
        CHECK(raw.fitted[i] == doctest::Approx(std_fit.fitted[i]).epsilon(1e-7));
}

TEST_CASE("a plan projects several targets against one factorization") {
    const std::size_t m = 200;
    std::vector<double> states(m);
    for (std::size_t i = 0; i < m; ++i) states[i] = normal_draw(31, i, 0);
    RegressionPlan plan(states, 1, RegressionBasis{2, 1e-10, true});
    std::vector<double> t1(m), t2(m);
    for (std::size_t i = 0; i < m; ++i) {
        t1[i] = states[i];
        t2[i] = 1.0 - states[i] * states[i];
    }
    RegressionFit f1 = plan.project(t1);
    RegressionFit f2 = plan.project(t2);
    for (std::size_t i = 0; i < m; ++i) {
        CHECK(f1.fitted[i] == doctest::Approx(states[i]).epsilon(1e-7));
        CHECK(f2.fitted[i] == doctest::Approx(1.0 - states[i] * states[i]).epsilon(1e-6));
    }
}

TEST_CASE("regression is deterministic across thread counts") {
    const std::size_t m = 5000;
    std::vector<double> states(m), targets(m);
    for (std::size_t i = 0; i < m; ++i) {
        states[i] = normal_draw(55, i, 0);
        targets[i] = std::sin(states[i]) + 0.01 * normal_draw(55, i, 1);
    }
    RegressionBasis basis{3, 1e-8, true};
    RegressionFit a = condexp_regress(targets, states, 1, basis, 1);
    RegressionFit b = condexp_regress(targets, states, 1, basis, 8);
    CHECK(a.coefficients == b.coefficients);
    CHECK(a.fitted == b.fitted);
}
