#pragma once

#include "qxct/qsim.hpp"

#include <vector>

/**
 * @file prune.hpp
 *
 * @brief Candidate gate endpoints from the density-matrix difference of the
 * interacting and non-interacting global states.
 */

namespace qxct::prune {

inline constexpr double kDefaultThreshold = 0.01;

struct QubitPair {
    int control = 0;
    int target = 0;

    bool operator==(const QubitPair&) const = default;
};

struct CandidateSet {
    std::vector<QubitPair> pairs;
    double threshold_used = kDefaultThreshold;

    std::size_t size() const noexcept { return pairs.size(); }
    bool empty() const noexcept { return pairs.empty(); }
};

/// |co><co| - |mono><mono|. Hermitian and traceless.
qsim::ComplexMatrix delta_rho(const qsim::StateVector& mono, const qsim::StateVector& co);

/**
 * Row-major scan of the off-diagonal elements with |value| > threshold. An element
 * whose row and column indices differ in exactly one bit t yields the pairs (q, t)
 * for every other qubit q set in both indices. Pairs are de-duplicated in first-seen order.
 */
CandidateSet extract_candidates(const qsim::ComplexMatrix& dr, const qsim::RegisterLayout& layout, double threshold);

} // namespace qxct::prune
