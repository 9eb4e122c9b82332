#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bsde/brownian.hpp"
#include "bsde/generator.hpp"
#include "bsde/regression.hpp"

namespace bsde {

/// Per-step implicit solve y = E_i[Y_{i+1}] + dt f(t_i, W_i, y, Z_i) by Picard
/// iteration. The contraction guard dt * L < 1 is checked before solving.
struct PicardConfig {
    double tol = 1e-8;
    std::size_t max_iter = 50;
};

struct PicardStepStats {
    std::size_t max_iterations = 0;
    double mean_iterations = 0.0;
    double max_final_increment = 0.0;
};

/// Discrete (Y, Z) processes on a path batch plus solver metadata.
struct SolutionEstimate {
    TimeGrid grid;
    BatchId batch_id;
    std::size_t dimension = 0;
    std::size_t paths = 0;
    RegressionBasis basis;
    std::string generator_id;

    std::vector<double> y;      // m * (N+1) + i
    std::vector<double> z;      // (m * N + i) * d + k
    std::vector<double> f_vals; // m * N + i: generator value used by the accepted iterate

    std::vector<PicardStepStats> picard; // one entry per time step, index i in [0, N)
    double y0_mean = 0.0;
    double y0_spread = 0.0; // max - min of Y_0 across paths

    double y_at(std::size_t m, std::size_t i) const { return y[m * (grid.steps + 1) + i]; }
    double& y_at(std::size_t m, std::size_t i) { return y[m * (grid.steps + 1) + i]; }
    std::span<const double> z_at(std::size_t m, std::size_t i) const {
        return {z.data() + (m * grid.steps + i) * dimension, dimension};
    }
};

/// Solves a Lipschitz BSDE on the batch by backward induction: Z from the
/// regression of the centered increment target (Y_{i+1} - E_i[Y_{i+1}]) dW / dt,
/// Y from the implicit one-step equation solved per path by Picard iteration
/// seeded at E_i[Y_{i+1}]. One regression plan per step is shared by all
/// Picard iterations and all Z coordinates. The effective Lipschitz constant
/// is gen.lipschitz_const unless overridden.
SolutionEstimate solve_lipschitz_bsde(const GeneratorSpec& gen, const TerminalSpec& terminal,
                                      const BrownianBatch& batch, const RegressionBasis& basis,
                                      const PicardConfig& picard, unsigned threads = 0,
                                      double lipschitz_override = -1.0);

/// The dominating driver g + K(|y| + |z|) built from the base metadata; its
/// solution bounds every envelope solution from above.
GeneratorSpec make_dominating_generator(GeneratorSpec::Bound g, double growth_K);

/// Smallest N with dt * L < 1 on [0, T].
std::size_t minimal_steps_for(double horizon, double lipschitz);

} // namespace bsde
