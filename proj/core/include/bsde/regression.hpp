#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace bsde {

/// Polynomial regression basis on the current state, with optional feature
/// standardization and a ridge term on the normal equations.
struct RegressionBasis {
    std::size_t degree = 3;
    double ridge = 1e-8;
    bool standardize = true;
};

std::size_t basis_size(std::size_t degree, std::size_t dimension);

/// A fitted least-squares projection. Coefficients are reported in the basis
/// actually used for the solve (standardized features when standardize is on).
struct RegressionFit {
    std::vector<double> coefficients;
    std::vector<double> fitted;
};

/// Least-squares projection of targets onto polynomial features of the states,
/// solved via normal equations with `ridge` added to the diagonal. States are
/// row-major M x d. Requires M > number of basis functions; a rank-deficient
/// design with ridge = 0 raises an error instructing a positive ridge.
RegressionFit condexp_regress(std::span<const double> targets, std::span<const double> states,
                              std::size_t dimension, const RegressionBasis& basis,
                              unsigned threads = 0);

/// Reusable per-step design: monomial features of (optionally standardized)
/// states with the normal-equation Cholesky factor computed once, so several
/// targets can be projected against the same states.
class RegressionPlan {
public:
    RegressionPlan(std::span<const double> states, std::size_t dimension,
                   const RegressionBasis& basis, unsigned threads = 0);

    RegressionFit project(std::span<const double> targets) const;
    std::size_t n_samples() const { return n_samples_; }
    std::size_t n_basis() const { return n_basis_; }

private:
    std::size_t n_samples_ = 0;
    std::size_t n_basis_ = 0;
    unsigned threads_ = 0;
    std::vector<double> features_; // M x n_basis, row-major
    std::vector<double> chol_;     // lower-triangular Cholesky factor of Phi'Phi + ridge I
};

} // namespace bsde
