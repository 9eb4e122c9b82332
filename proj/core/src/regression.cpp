#include "bsde/regression.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bsde/errors.hpp"
#include "bsde/parallel.hpp"

namespace bsde {

std::size_t basis_size(std::size_t degree, std::size_t dimension) {
    // Monomials of total degree <= degree in `dimension` variables.
    std::size_t n = 1;
    for (std::size_t j = 1; j <= dimension; ++j) n = n * (degree + j) / j;
    return n;
}

namespace {

// Exponent tuples in graded order: degree 0 first, so coefficient 0 is the intercept.
std::vector<std::vector<unsigned>> monomial_exponents(std::size_t degree, std::size_t dimension) {
    std::vector<std::vector<unsigned>> out;
    std::vector<unsigned> current(dimension, 0);
    auto emit = [&](auto&& self, std::size_t pos, unsigned remaining) -> void {
        if (pos + 1 == dimension) {
            current[pos] = remaining;
            out.push_back(current);
            return;
        }
        for (unsigned e = 0; e <= remaining; ++e) {
            current[pos] = remaining - e;
            self(self, pos + 1, e);
        }
    };
    for (unsigned total = 0; total <= degree; ++total) {
        if (dimension == 0) break;
        emit(emit, 0, total);
    }
    return out;
}

// In-place lower Cholesky; returns false on a pivot at or below the threshold.
bool cholesky(std::vector<double>& a, std::size_t n, double pivot_threshold) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
        if (!(diag > pivot_threshold)) return false;
        const double root = std::sqrt(diag);
        a[j * n + j] = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / root;
        }
    }
    return true;
}

void cholesky_solve(const std::vector<double>& chol, std::size_t n, std::vector<double>& rhs) {
    for (std::size_t i = 0; i < n; ++i) {
        double v = rhs[i];
        for (std::size_t k = 0; k < i; ++k) v -= chol[i * n + k] * rhs[k];
        rhs[i] = v / chol[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = rhs[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= chol[k * n + ii] * rhs[k];
        rhs[ii] = v / chol[ii * n + ii];
    }
}

} // namespace

RegressionPlan::RegressionPlan(std::span<const double> states, std::size_t dimension,
                               const RegressionBasis& basis, unsigned threads)
    : threads_(threads) {
    if (dimension == 0) throw ConfigError("regression needs state dimension >= 1");
    if (states.size() % dimension != 0)
        throw ConfigError("state buffer size is not a multiple of the dimension");
    if (basis.degree > 10) throw ConfigError("basis degree must be <= 10");
    if (basis.ridge < 0.0) throw ConfigError("ridge must be nonnegative");
    n_samples_ = states.size() / dimension;
    n_basis_ = basis_size(basis.degree, dimension);
    if (n_samples_ <= n_basis_)
        throw ConfigError("regression needs more samples than basis functions (M = " +
                          std::to_string(n_samples_) + ", basis = " + std::to_string(n_basis_) + ")");

    // Optional standardization; a constant feature column is mapped to zero
    // so the intercept absorbs it instead of blowing up the scale.
    std::vector<double> shift(dimension, 0.0), scale(dimension, 1.0);
    if (basis.standardize) {
        for (std::size_t k = 0; k < dimension; ++k) {
            double mean = 0.0;
            for (std::size_t m = 0; m < n_samples_; ++m) mean += states[m * dimension + k];
            mean /= static_cast<double>(n_samples_);
            double var = 0.0;
            for (std::size_t m = 0; m < n_samples_; ++m) {
                const double c = states[m * dimension + k] - mean;
                var += c * c;
            }
            var /= static_cast<double>(n_samples_ > 1 ? n_samples_ - 1 : 1);
            shift[k] = mean;
            scale[k] = var > 1e-300 ? std::sqrt(var) : 0.0;
        }
    }

    const auto exponents = monomial_exponents(basis.degree, dimension);
    features_.resize(n_samples_ * n_basis_);
    parallel_for(n_samples_, threads_, [&](std::size_t m) {
        std::vector<double> x(dimension);
        for (std::size_t k = 0; k < dimension; ++k) {
            const double raw = states[m * dimension + k];
            x[k] = basis.standardize ? (scale[k] > 0.0 ? (raw - shift[k]) / scale[k] : 0.0) : raw;
        }
        double* row = features_.data() + m * n_basis_;
        for (std::size_t j = 0; j < n_basis_; ++j) {
            double v = 1.0;
            for (std::size_t k = 0; k < dimension; ++k)
                for (unsigned e = 0; e < exponents[j][k]; ++e) v *= x[k];
            row[j] = v;
        }
    });

    // Normal matrix by fixed-block reduction: block partials are combined in
    // block order so the result is thread-count independent.
    const std::size_t nb = n_basis_;
    const std::size_t n_blocks = block_count_for(n_samples_);
    std::vector<std::vector<double>> partial(n_blocks, std::vector<double>(nb * nb, 0.0));
    for_each_block(n_samples_, threads_, [&](std::size_t b, BlockRange r) {
        std::vector<double>& acc = partial[b];
        for (std::size_t m = r.begin; m < r.end; ++m) {
            const double* row = features_.data() + m * nb;
            for (std::size_t i = 0; i < nb; ++i)
                for (std::size_t j = 0; j <= i; ++j) acc[i * nb + j] += row[i] * row[j];
        }
    });
    std::vector<double> normal(nb * nb, 0.0);
    for (const auto& acc : partial)
        for (std::size_t i = 0; i < nb * nb; ++i) normal[i] += acc[i];
    for (std::size_t i = 0; i < nb; ++i)
        for (std::size_t j = i + 1; j < nb; ++j) normal[i * nb + j] = normal[j * nb + i];
    double max_diag = 0.0;
    for (std::size_t i = 0; i < nb; ++i) max_diag = std::max(max_diag, normal[i * nb + i]);
    for (std::size_t i = 0; i < nb; ++i) normal[i * nb + i] += basis.ridge;

    // With ridge = 0 a tiny pivot means a genuinely deficient design; with a
    // positive ridge the matrix is positive definite by construction.
    const double pivot_threshold = basis.ridge > 0.0 ? 0.0 : 1e-13 * max_diag;
    chol_ = std::move(normal);
    if (!cholesky(chol_, nb, pivot_threshold)) {
        if (basis.ridge == 0.0)
            throw NumericError("rank-deficient regression design with ridge = 0; "
                               "set a positive ridge (e.g. basis.ridge = 1e-8)");
        throw NumericError("regression normal equations are not positive definite");
    }
}

RegressionFit RegressionPlan::project(std::span<const double> targets) const {
    if (targets.size() != n_samples_)
        throw ConfigError("target count does not match the design");
    const std::size_t nb = n_basis_;

    const std::size_t n_blocks = block_count_for(n_samples_);
    std::vector<std::vector<double>> partial(n_blocks, std::vector<double>(nb, 0.0));
    for_each_block(n_samples_, threads_, [&](std::size_t b, BlockRange r) {
        std::vector<double>& acc = partial[b];
        for (std::size_t m = r.begin; m < r.end; ++m) {
            const double* row = features_.data() + m * nb;
            const double t = targets[m];
            for (std::size_t j = 0; j < nb; ++j) acc[j] += row[j] * t;
        }
    });
    RegressionFit fit;
    fit.coefficients.assign(nb, 0.0);
    for (const auto& acc : partial)
        for (std::size_t j = 0; j < nb; ++j) fit.coefficients[j] += acc[j];
    cholesky_solve(chol_, nb, fit.coefficients);

    fit.fitted.resize(n_samples_);
    parallel_for(n_samples_, threads_, [&](std::size_t m) {
        const double* row = features_.data() + m * nb;
        double v = 0.0;
        for (std::size_t j = 0; j < nb; ++j) v += row[j] * fit.coefficients[j];
        fit.fitted[m] = v;
    });
    return fit;
}

RegressionFit condexp_regress(std::span<const double> targets, std::span<const double> states,
                              std::size_t dimension, const RegressionBasis& basis,
                              unsigned threads) {
    RegressionPlan plan(states, dimension, basis, threads);
    return plan.project(targets);
}

} // namespace bsde
