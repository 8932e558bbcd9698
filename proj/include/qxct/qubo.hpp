#pragma once

#include "qxct/common.hpp"
#include "qxct/search.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

/**
 * @file qubo.hpp
 *
 * @brief Gate selection as a QUBO: E(x) = sum_i Q_ii x_i + sum_{i<j} Q_ij x_i x_j.
 *
 * Bit i of an assignment selects candidate i. Diagonal terms are single-gate gains over
 * the empty circuit; off-diagonal terms are the pairwise synergy under the better of the
 * two gate orders.
 */

namespace qxct::search {

inline constexpr std::size_t kMaxExactQuboSize = 22;
inline constexpr std::size_t kMaxAnnealingQuboSize = 64;
inline constexpr std::size_t kMaxVariationalQuboSize = static_cast<std::size_t>(kMaxQubits);
inline constexpr int kDefaultTopK = 4;

/// Single-gate costs on the diagonal, ordered gate-pair costs (G_i then G_j) off it.
struct KlMatrix {
    Eigen::MatrixXd values;
    double baseline = 0.0;
};

struct QuboProblem {
    /// Symmetric; the pair coefficient Q_ij is stored at both (i, j) and (j, i).
    Eigen::MatrixXd q;
    double baseline = 0.0;
    double penalty = 0.0;

    std::size_t size() const noexcept { return static_cast<std::size_t>(q.rows()); }
    double energy(std::uint64_t assignment) const;
};

/// Spin form with x_i = (1 - z_i) / 2: E = offset + sum h_i z_i + sum_{i<j} J_ij z_i z_j.
struct IsingModel {
    double offset = 0.0;
    Eigen::VectorXd h;
    Eigen::MatrixXd j;

    /// Energy of the spin configuration whose bit i set means z_i = -1.
    double energy(std::uint64_t assignment) const;
};

struct QuboSolution {
    std::uint64_t assignment = 0;
    double energy = 0.0;

    bool selected(std::size_t i) const noexcept { return (assignment >> i) & 1u; }
    bool operator==(const QuboSolution&) const = default;
};

enum class HeuristicMode { Annealing, Vqe, Qaoa };

/// Thrown when a variational solver is asked for more variables than the simulator holds.
class QuboTooLarge : public qxct::Error {
public:
    using qxct::Error::Error;
};

KlMatrix build_kl_matrix(Evaluator& eval, const prune::CandidateSet& cands);
KlMatrix build_kl_matrix(const cost::Problem& problem, const prune::CandidateSet& cands);

/// Non-finite coefficients are replaced by P = 10 * max |finite Q| (or 1 when every finite entry is 0).
QuboProblem build_qubo(const Eigen::MatrixXd& m, double baseline);

IsingModel to_ising(const QuboProblem& q);

/// Exhaustive minimum; ties go to the smallest assignment value.
QuboSolution solve_qubo_exact(const QuboProblem& q);

/// Up to top_k distinct low-energy assignments, best first. Deterministic per seed.
std::vector<QuboSolution> solve_qubo_heuristic(const QuboProblem& q, HeuristicMode mode, std::uint64_t seed,
                                               int top_k = kDefaultTopK);

enum class QuboSolver { Exact, Annealing, Vqe, Qaoa };

/**
 * Full QUBO strategy: KL matrix, QUBO, selection, then ordering of every returned gate set.
 * The best ordered set wins; the empty circuit is kept if nothing beats it. Variational
 * solvers fall back to annealing above the simulator cap.
 */
SearchResult qubo_search(const cost::Problem& problem, const prune::CandidateSet& cands, const SearchConfig& cfg,
                         QuboSolver solver, int top_k = kDefaultTopK, std::uint64_t seed = 0);

} // namespace qxct::search
