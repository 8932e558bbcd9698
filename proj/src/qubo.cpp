#include "qxct/qubo.hpp"
#include "qxct/common.hpp"
#include "qxct/simplex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

namespace qxct::search {

double QuboProblem::energy(std::uint64_t assignment) const {
    const auto n = static_cast<Eigen::Index>(size());
    double e = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!((assignment >> i) & 1u)) {
            continue;
        }
        e += q(i, i);
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if ((assignment >> j) & 1u) {
                e += q(i, j);
            }
        }
    }
    return e;
}

double IsingModel::energy(std::uint64_t assignment) const {
    const auto n = h.size();
    auto spin = [&](Eigen::Index i) { return ((assignment >> i) & 1u) ? -1.0 : 1.0; };
    double e = offset;
    for (Eigen::Index i = 0; i < n; ++i) {
        e += h[i] * spin(i);
        for (Eigen::Index k = i + 1; k < n; ++k) {
            e += j(i, k) * spin(i) * spin(k);
        }
    }
    return e;
}

KlMatrix build_kl_matrix(Evaluator& eval, const prune::CandidateSet& cands) {
    if (cands.empty()) {
        throw Error("KL matrix needs at least one candidate gate");
    }
    const std::size_t n = cands.size();
    KlMatrix km;
    km.baseline = eval(qsim::Topology{}, "kl-matrix").total;

    std::vector<qsim::Topology> trials;
    trials.reserve(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            qsim::Topology t;
            t.gates.push_back(to_gate(cands.pairs[i]));
            if (i != j) {
                t.gates.push_back(to_gate(cands.pairs[j]));
            }
            trials.push_back(std::move(t));
        }
    }
    const auto costs = eval.batch(trials, "kl-matrix");
    km.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            km.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = costs[i * n + j].total;
        }
    }
    return km;
}

KlMatrix build_kl_matrix(const cost::Problem& problem, const prune::CandidateSet& cands) {
    Evaluator eval(problem);
    return build_kl_matrix(eval, cands);
}

QuboProblem build_qubo(const Eigen::MatrixXd& m, double baseline) {
    if (m.rows() != m.cols()) {
        throw Error("KL matrix must be square");
    }
    const auto n = m.rows();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    QuboProblem out;
    out.baseline = baseline;
    out.q = Eigen::MatrixXd::Constant(n, n, nan);

    for (Eigen::Index i = 0; i < n; ++i) {
        out.q(i, i) = m(i, i) - baseline;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double best_order = std::min(m(i, j), m(j, i));
            const double qij = (best_order - baseline) - out.q(i, i) - out.q(j, j);
            out.q(i, j) = qij;
            out.q(j, i) = qij;
        }
    }

    double max_abs = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::isfinite(out.q(i, j))) {
                max_abs = std::max(max_abs, std::abs(out.q(i, j)));
            }
        }
    }
    out.penalty = max_abs > 0.0 ? 10.0 * max_abs : 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!std::isfinite(out.q(i, j))) {
                out.q(i, j) = out.penalty;
            }
        }
    }
    return out;
}

IsingModel to_ising(const QuboProblem& q) {
    const auto n = static_cast<Eigen::Index>(q.size());
    IsingModel is;
    is.h = Eigen::VectorXd::Zero(n);
    is.j = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        is.offset += q.q(i, i) / 2.0;
        is.h[i] -= q.q(i, i) / 2.0;
        for (Eigen::Index k = i + 1; k < n; ++k) {
            const double c = q.q(i, k) / 4.0;
            is.offset += c;
            is.h[i] -= c;
            is.h[k] -= c;
            is.j(i, k) = c;
            is.j(k, i) = c;
        }
    }
    return is;
}

QuboSolution solve_qubo_exact(const QuboProblem& q) {
    const std::size_t n = q.size();
    if (n > kMaxExactQuboSize) {
        throw QuboTooLarge("exact QUBO solver is limited to " + std::to_string(kMaxExactQuboSize) + " variables, got " +
                           std::to_string(n));
    }
    const double tie = 1e-12 * (1.0 + q.q.cwiseAbs().maxCoeff() * static_cast<double>(n));

    // Gray-code walk: one bit flips per step, so the energy updates in O(n).
    std::uint64_t x = 0;
    double e = 0.0;
    QuboSolution best{0, 0.0};
    for (std::uint64_t k = 1; k < (std::uint64_t{1} << n); ++k) {
        const int b = std::countr_zero(k);
        double field = q.q(b, b);
        for (std::size_t j = 0; j < n; ++j) {
            if (static_cast<int>(j) != b && ((x >> j) & 1u)) {
                field += q.q(b, static_cast<Eigen::Index>(j));
            }
        }
        const bool was_set = (x >> b) & 1u;
        e += was_set ? -field : field;
        x ^= std::uint64_t{1} << b;
        if (e < best.energy - tie || (std::abs(e - best.energy) <= tie && x < best.assignment)) {
            best = {x, e};
        }
    }
    best.energy = q.energy(best.assignment);
    return best;
}

namespace {

double uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

class TopK {
public:
    explicit TopK(std::size_t k) : k_(k) {}

    void offer(std::uint64_t x, double e) {
        for (const auto& s : items_) {
            if (s.assignment == x) {
                return;
            }
        }
        if (items_.size() == k_ && !(e < items_.back().energy)) {
            return;
        }
        if (items_.size() == k_) {
            items_.pop_back();
        }
        const auto pos = std::upper_bound(items_.begin(), items_.end(), e,
                                          [](double v, const QuboSolution& s) { return v < s.energy; });
        items_.insert(pos, QuboSolution{x, e});
    }

    std::vector<QuboSolution> take() { return std::move(items_); }

private:
    std::size_t k_;
    std::vector<QuboSolution> items_;
};

std::vector<QuboSolution> anneal(const QuboProblem& q, std::uint64_t seed, std::size_t top_k) {
    const std::size_t n = q.size();
    if (n > kMaxAnnealingQuboSize) {
        throw QuboTooLarge("annealing is limited to " + std::to_string(kMaxAnnealingQuboSize) + " variables");
    }
    std::mt19937_64 rng(seed);
    TopK found(top_k);

    double t_start = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        t_start = std::max(t_start, q.q.row(static_cast<Eigen::Index>(i)).cwiseAbs().sum());
    }
    if (t_start == 0.0) {
        t_start = 1.0;
    }
    const double t_end = t_start * 1e-4;
    const std::size_t restarts = 16 + 2 * n;
    const std::size_t sweeps = 400;

    auto flip_delta = [&](std::uint64_t x, std::size_t b) {
        double field = q.q(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(b));
        for (std::size_t j = 0; j < n; ++j) {
            if (j != b && ((x >> j) & 1u)) {
                field += q.q(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(j));
            }
        }
        return ((x >> b) & 1u) ? -field : field;
    };

    for (std::size_t r = 0; r < restarts; ++r) {
        std::uint64_t x = n == 64 ? rng() : rng() & ((std::uint64_t{1} << n) - 1);
        double e = q.energy(x);
        found.offer(x, e);
        for (std::size_t s = 0; s < sweeps; ++s) {
            const double t = t_start * std::pow(t_end / t_start, static_cast<double>(s) / static_cast<double>(sweeps - 1));
            for (std::size_t b = 0; b < n; ++b) {
                const double d = flip_delta(x, b);
                if (d <= 0.0 || uniform(rng) < std::exp(-d / t)) {
                    x ^= std::uint64_t{1} << b;
                    e += d;
                    found.offer(x, e);
                }
            }
        }
        // Zero-temperature polish.
        bool moved = true;
        while (moved) {
            moved = false;
            for (std::size_t b = 0; b < n; ++b) {
                const double d = flip_delta(x, b);
                if (d < 0.0) {
                    x ^= std::uint64_t{1} << b;
                    e += d;
                    found.offer(x, e);
                    moved = true;
                }
            }
        }
    }

    auto out = found.take();
    for (auto& s : out) {
        s.energy = q.energy(s.assignment);
    }
    std::stable_sort(out.begin(), out.end(), [](const QuboSolution& a, const QuboSolution& b) {
        return a.energy < b.energy || (a.energy == b.energy && a.assignment < b.assignment);
    });
    return out;
}

std::vector<double> diagonal_energies(const IsingModel& ising, std::size_t n) {
    std::vector<double> e(basis_size(static_cast<int>(n)));
    for (std::size_t b = 0; b < e.size(); ++b) {
        e[b] = ising.energy(b);
    }
    return e;
}

double expectation(const qsim::StateVector& s, std::span<const double> diag) {
    double v = 0.0;
    const auto amps = s.amplitudes();
    for (std::size_t b = 0; b < amps.size(); ++b) {
        v += std::norm(amps[b]) * diag[b];
    }
    return v;
}

// RY layer, linear CNOT chain, RY layer, chain, final RY layer: 3n angles.
qsim::StateVector vqe_state(std::size_t n, std::span<const double> theta) {
    constexpr std::size_t kLayers = 2;
    auto s = qsim::StateVector::basis(static_cast<int>(n));
    for (std::size_t layer = 0; layer <= kLayers; ++layer) {
        for (std::size_t i = 0; i < n; ++i) {
            qsim::apply_gate_in_place(s, qsim::GateSpec::ry(static_cast<int>(i), theta[layer * n + i]));
        }
        if (layer == kLayers) {
            break;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            qsim::apply_gate_in_place(s, qsim::GateSpec::cnot(static_cast<int>(i), static_cast<int>(i + 1)));
        }
    }
    return s;
}

// |+>^n, then p rounds of cost phase exp(-i gamma H) and mixer RX(2 beta) on every qubit.
qsim::StateVector qaoa_state(std::size_t n, std::span<const double> diag, std::span<const double> params) {
    auto s = qsim::StateVector::basis(static_cast<int>(n));
    for (std::size_t i = 0; i < n; ++i) {
        qsim::apply_gate_in_place(s, qsim::GateSpec::h(static_cast<int>(i)));
    }
    const std::size_t depth = params.size() / 2;
    for (std::size_t l = 0; l < depth; ++l) {
        qsim::apply_diagonal_phase(s, diag, params[2 * l]);
        for (std::size_t i = 0; i < n; ++i) {
            qsim::apply_gate_in_place(s, qsim::GateSpec::rx(static_cast<int>(i), 2.0 * params[2 * l + 1]));
        }
    }
    return s;
}

std::vector<QuboSolution> most_probable(const QuboProblem& q, const qsim::StateVector& s, std::size_t top_k) {
    const auto amps = s.amplitudes();
    std::vector<std::size_t> idx(amps.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return std::norm(amps[a]) > std::norm(amps[b]); });
    std::vector<QuboSolution> out;
    for (std::size_t k = 0; k < std::min(top_k, idx.size()); ++k) {
        out.push_back({idx[k], q.energy(idx[k])});
    }
    return out;
}

std::vector<QuboSolution> variational(const QuboProblem& q, HeuristicMode mode, std::uint64_t seed,
                                      std::size_t top_k) {
    const std::size_t n = q.size();
    if (n > kMaxVariationalQuboSize) {
        throw QuboTooLarge("variational QUBO solvers are limited to " + std::to_string(kMaxVariationalQuboSize) +
                           " variables, got " + std::to_string(n));
    }
    const auto diag = diagonal_energies(to_ising(q), n);

    // The QAOA phase sees a centred, unit-scale spectrum; this only rescales gamma.
    std::vector<double> scaled = diag;
    const double mean = std::accumulate(diag.begin(), diag.end(), 0.0) / static_cast<double>(diag.size());
    double spread = 0.0;
    for (const double v : diag) {
        spread = std::max(spread, std::abs(v - mean));
    }
    for (auto& v : scaled) {
        v = spread > 0.0 ? (v - mean) / spread : 0.0;
    }

    constexpr std::size_t kQaoaDepth = 2;
    constexpr std::size_t kStarts = 4;
    const std::size_t dim = mode == HeuristicMode::Vqe ? 3 * n : 2 * kQaoaDepth;

    std::mt19937_64 rng(seed);
    auto prepare = [&](std::span<const double> theta) {
        return mode == HeuristicMode::Vqe ? vqe_state(n, theta) : qaoa_state(n, scaled, theta);
    };
    const tune::Objective objective = [&](std::span<const double> theta) { return expectation(prepare(theta), scaled); };

    tune::SimplexResult best;
    best.value = std::numeric_limits<double>::infinity();
    for (std::size_t start = 0; start < kStarts; ++start) {
        std::vector<double> x0(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            const double range = mode == HeuristicMode::Vqe ? 2.0 * std::numbers::pi
                                                            : (k % 2 == 0 ? std::numbers::pi : std::numbers::pi / 2);
            x0[k] = mode == HeuristicMode::Vqe ? (uniform(rng) - 0.5) * range : uniform(rng) * range;
        }
        tune::SimplexOptions opts;
        opts.initial_step = mode == HeuristicMode::Vqe ? std::numbers::pi / 2 : 0.5;
        opts.tolerance = 1e-8;
        auto r = tune::minimize_simplex(objective, std::move(x0), opts);
        if (r.value < best.value) {
            best = std::move(r);
        }
    }
    return most_probable(q, prepare(best.x), top_k);
}

} // namespace

std::vector<QuboSolution> solve_qubo_heuristic(const QuboProblem& q, HeuristicMode mode, std::uint64_t seed,
                                               int top_k) {
    if (top_k < 1) {
        throw Error("top_k must be at least 1");
    }
    if (q.size() == 0) {
        return {QuboSolution{0, 0.0}};
    }
    const auto k = static_cast<std::size_t>(top_k);
    if (mode == HeuristicMode::Annealing) {
        return anneal(q, seed, k);
    }
    return variational(q, mode, seed, k);
}

SearchResult qubo_search(const cost::Problem& problem, const prune::CandidateSet& cands, const SearchConfig& cfg,
                         QuboSolver solver, int top_k, std::uint64_t seed) {
    cfg.validate();
    Evaluator eval(problem, cfg.workers);
    SearchResult r;
    r.cost = eval(r.topology, "baseline");
    if (cands.empty()) {
        r.evaluations = eval.evaluations();
        r.history = eval.take_history();
        return r;
    }

    const KlMatrix km = build_kl_matrix(eval, cands);
    const QuboProblem q = build_qubo(km.values, km.baseline);

    std::vector<QuboSolution> selections;
    if (solver == QuboSolver::Exact) {
        selections.push_back(solve_qubo_exact(q));
    } else {
        const HeuristicMode mode = solver == QuboSolver::Vqe    ? HeuristicMode::Vqe
                                   : solver == QuboSolver::Qaoa ? HeuristicMode::Qaoa
                                                                : HeuristicMode::Annealing;
        try {
            selections = solve_qubo_heuristic(q, mode, seed, top_k);
        } catch (const QuboTooLarge&) {
            if (mode == HeuristicMode::Annealing) {
                throw;
            }
            selections = solve_qubo_heuristic(q, HeuristicMode::Annealing, seed, top_k);
        }
    }

    r.evaluations = eval.evaluations();
    r.history = eval.take_history();
    r.qubo = QuboSelection{selections.front().assignment, selections.front().energy};
    for (const auto& sel : selections) {
        std::vector<prune::QubitPair> gates;
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (sel.selected(i)) {
                gates.push_back(cands.pairs[i]);
            }
        }
        if (gates.empty()) {
            continue;
        }
        auto ordered = order_selected(problem, gates, cfg);
        r.evaluations += ordered.evaluations;
        r.history.insert(r.history.end(), std::make_move_iterator(ordered.history.begin()),
                         std::make_move_iterator(ordered.history.end()));
        if (ordered.cost.total < r.cost.total) {
            r.topology = std::move(ordered.topology);
            r.cost = ordered.cost;
        }
    }
    return r;
}

} // namespace qxct::search
