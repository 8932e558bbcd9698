#include "qxct/prune.hpp"
#include "qxct/common.hpp"

#include <algorithm>
#include <bit>

namespace qxct::prune {

qsim::ComplexMatrix delta_rho(const qsim::StateVector& mono, const qsim::StateVector& co) {
    if (mono.num_qubits() != co.num_qubits()) {
        throw Error("delta_rho of states with " + std::to_string(mono.num_qubits()) + " and " +
                    std::to_string(co.num_qubits()) + " qubits");
    }
    return qsim::density_matrix(co) - qsim::density_matrix(mono);
}

CandidateSet extract_candidates(const qsim::ComplexMatrix& dr, const qsim::RegisterLayout& layout, double threshold) {
    if (!(threshold > 0.0)) {
        throw Error("pruning threshold must be positive");
    }
    const auto dim = static_cast<Eigen::Index>(basis_size(layout.total()));
    if (dr.rows() != dim || dr.cols() != dim) {
        throw Error("density-matrix difference does not match the " + std::to_string(layout.total()) + "-qubit layout");
    }

    CandidateSet out;
    out.threshold_used = threshold;
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            if (r == c || std::abs(dr(r, c)) <= threshold) {
                continue;
            }
            const auto diff = static_cast<std::uint32_t>(r ^ c);
            if (std::popcount(diff) != 1) {
                continue;
            }
            const int target = std::countr_zero(diff);
            const auto shared = static_cast<std::uint32_t>(r & c);
            for (int q = 0; q < layout.total(); ++q) {
                if (q == target || !((shared >> q) & 1u)) {
                    continue;
                }
                const QubitPair pair{q, target};
                if (std::find(out.pairs.begin(), out.pairs.end(), pair) == out.pairs.end()) {
                    out.pairs.push_back(pair);
                }
            }
        }
    }
    return out;
}

} // namespace qxct::prune
