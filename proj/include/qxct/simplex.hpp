#pragma once

#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <vector>

namespace qxct::tune {

struct SimplexOptions {
    /// Edge length of the first simplex; halved on every restart.
    double initial_step = std::numbers::pi / 2;
    /// Stop once a full restart-and-poll cycle improves the objective by less than this.
    double tolerance = 1e-6;
    /// Evaluation budget; 0 means 500 per dimension.
    std::size_t max_evaluations = 0;
};

struct SimplexResult {
    std::vector<double> x;
    double value = 0.0;
    std::size_t evaluations = 0;
};

using Objective = std::function<double(std::span<const double>)>;

/**
 * Derivative-free Nelder-Mead minimization with restarts. Each cycle runs a simplex
 * descent from the incumbent and then polls +/- step along every axis. The incumbent
 * only moves on strict improvement, so the result is never worse than f(x0).
 */
SimplexResult minimize_simplex(const Objective& f, std::vector<double> x0, const SimplexOptions& options = {});

} // namespace qxct::tune
