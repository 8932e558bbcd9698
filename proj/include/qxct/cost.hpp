#pragma once

#include "qxct/qsim.hpp"

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

/**
 * @file cost.hpp
 *
 * @brief KL-divergence objective of a circuit against per-cell-type target marginals.
 *
 * The objective is D(P_ct1 || Q_ct1) + D(P_ct2 || Q_ct2), where P are the circuit's
 * register marginals and Q the co-culture targets. Natural logarithms throughout.
 */

namespace qxct::cost {

inline constexpr double kDefaultSmoothing = 1e-9;
inline constexpr std::uint64_t kDefaultShots = 8192;

/// Marginals computed from the statevector.
struct ExactMode {};

/// Marginals estimated from sampled measurement counts.
struct ShotsMode {
    std::uint64_t nshots = kDefaultShots;
    std::uint64_t seed = 0;
};

using EvalMode = std::variant<ExactMode, ShotsMode>;

struct Problem {
    qsim::StateVector initial_state;
    qsim::RegisterLayout layout;
    Distribution target_ct1;
    Distribution target_ct2;
    EvalMode eval_mode = ExactMode{};
    double smoothing = kDefaultSmoothing;

    void validate() const;
};

struct CostReport {
    double total = 0.0;
    double kl_ct1 = 0.0;
    double kl_ct2 = 0.0;

    bool operator==(const CostReport&) const = default;
};

/**
 * sum_{p(s)>0} p(s) ln(p(s)/q'(s)) with q' = (q + smoothing) / sum(q + smoothing).
 * Finite for any smoothing > 0.
 */
double kl_divergence(const Distribution& p, const Distribution& q, double smoothing = kDefaultSmoothing);

/// Per-register output distributions of a circuit, according to the problem's eval mode.
std::pair<Distribution, Distribution> output_marginals(const Problem& problem, const qsim::Topology& t);

CostReport evaluate(const Problem& problem, const qsim::Topology& t);

/// Element i equals evaluate(problem, ts[i]) regardless of the worker count.
std::vector<CostReport> evaluate_batch(const Problem& problem, std::span<const qsim::Topology> ts, int workers = 1);

} // namespace qxct::cost
