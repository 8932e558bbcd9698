#pragma once

#include "qxct/cost.hpp"
#include "qxct/prune.hpp"

#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file search.hpp
 *
 * @brief Discrete topology search over a pruned candidate set.
 *
 * Every strategy builds circuits from fixed-angle CRX(pi/2) gates and accepts only
 * improvements over the empty circuit. Ties break by candidate-set order, then by
 * insertion position, so results are deterministic for a fixed problem in exact mode.
 */

namespace qxct::search {

inline constexpr double kSearchAngle = std::numbers::pi / 2;

struct SearchConfig {
    /// Significance threshold for accepting insertions/additions and for Occam selection.
    double kl_tol = 0.01;
    /// Margin for accepting deletions in local search.
    double eps_prune = 1e-4;
    /// Length of the ordered gate groups tried by permutation addition.
    int n_choose = 2;
    /// Multi-epoch epochs; unset means one epoch per candidate.
    std::optional<int> n_epochs;
    int max_depth = 12;
    std::uint64_t shuffle_seed = 0;
    /// Parallel evaluation of independent neighbours; never changes results.
    int workers = 1;

    void validate() const;
};

struct TraceRecord {
    qsim::Topology sequence;
    cost::CostReport cost;
    std::string phase;
};

/// Lowest-energy gate selection of a QUBO strategy; bit i selects candidate i.
struct QuboSelection {
    std::uint64_t assignment = 0;
    double energy = 0.0;
};

struct SearchResult {
    qsim::Topology topology;
    cost::CostReport cost;
    std::size_t evaluations = 0;
    std::vector<TraceRecord> history;
    std::optional<QuboSelection> qubo;
};

struct Move {
    qsim::Topology topology;
    cost::CostReport cost;
};

/// Cost oracle that counts calls and records every evaluated sequence.
class Evaluator {
public:
    Evaluator(const cost::Problem& problem, int workers = 1);

    cost::CostReport operator()(const qsim::Topology& t, std::string_view phase);
    std::vector<cost::CostReport> batch(std::span<const qsim::Topology> ts, std::string_view phase);

    const cost::Problem& problem() const noexcept { return problem_; }
    std::size_t evaluations() const noexcept { return evaluations_; }
    const std::vector<TraceRecord>& history() const noexcept { return history_; }
    std::vector<TraceRecord> take_history() { return std::move(history_); }

private:
    const cost::Problem& problem_;
    int workers_;
    std::size_t evaluations_ = 0;
    std::vector<TraceRecord> history_;
};

qsim::GateSpec to_gate(const prune::QubitPair& pair, double angle = kSearchAngle);
qsim::Topology to_topology(std::span<const prune::QubitPair> pairs, double angle = kSearchAngle);

/// Candidates whose (control, target) pair does not already appear in `seq`, in candidate order.
std::vector<prune::QubitPair> unused_candidates(const qsim::Topology& seq, const prune::CandidateSet& cands);

/// Best unused gate at the best position. Nullopt when every candidate is used.
std::optional<Move> best_insertion(Evaluator& eval, const qsim::Topology& seq, const prune::CandidateSet& cands);

/// Best ordered n-permutation of unused gates appended to `seq`. Nullopt when fewer than n are unused.
std::optional<Move> best_permutation_addition(Evaluator& eval, const qsim::Topology& seq,
                                              const prune::CandidateSet& cands, int n);

/// Best single-position removal. Nullopt for an empty sequence.
std::optional<Move> best_deletion(Evaluator& eval, const qsim::Topology& seq);

/// Iterative insertion / n-wise addition / deletion until a full pass makes no improvement.
SearchResult local_search(const cost::Problem& problem, const prune::CandidateSet& cands, const SearchConfig& cfg);

/// Shuffled-start greedy forward construction, backward refinement and Occam selection.
SearchResult multi_epoch(const cost::Problem& problem, const prune::CandidateSet& cands, const SearchConfig& cfg);

/**
 * Index into `history` of the Occam choice: entries are visited shortest first
 * (stable within a length) and a longer sequence replaces the incumbent only if it
 * is cheaper by more than kl_tol. Repeated sequences count once.
 */
std::size_t occam_select(std::span<const TraceRecord> history, double kl_tol);

/// Best ordering of a selected gate set: exhaustive up to 8 gates, multi-epoch beyond.
SearchResult order_selected(const cost::Problem& problem, std::span<const prune::QubitPair> gates,
                            const SearchConfig& cfg);

inline constexpr std::size_t kMaxExhaustiveOrdering = 8;

/// One JSON object per line: {"phase", "sequence": [[control, target, angle], ...], "total", "kl_ct1", "kl_ct2"}.
void write_trace(std::ostream& out, std::span<const TraceRecord> history);

} // namespace qxct::search
