#include "qxct/search.hpp"
#include "qxct/common.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <ostream>
#include <random>

namespace qxct::search {

void SearchConfig::validate() const {
    if (!(kl_tol > 0.0)) {
        throw Error("kl_tol must be positive");
    }
    if (!(eps_prune > 0.0)) {
        throw Error("eps_prune must be positive");
    }
    if (n_choose < 1) {
        throw Error("n_choose must be at least 1");
    }
    if (n_epochs && *n_epochs < 1) {
        throw Error("n_epochs must be at least 1");
    }
    if (max_depth < 1) {
        throw Error("max_depth must be at least 1");
    }
    if (workers < 1) {
        throw Error("workers must be at least 1");
    }
}

Evaluator::Evaluator(const cost::Problem& problem, int workers) : problem_(problem), workers_(workers) {
    problem_.validate();
}

cost::CostReport Evaluator::operator()(const qsim::Topology& t, std::string_view phase) {
    const auto r = cost::evaluate(problem_, t);
    ++evaluations_;
    history_.push_back({t, r, std::string(phase)});
    return r;
}

std::vector<cost::CostReport> Evaluator::batch(std::span<const qsim::Topology> ts, std::string_view phase) {
    auto rs = cost::evaluate_batch(problem_, ts, workers_);
    evaluations_ += ts.size();
    for (std::size_t i = 0; i < ts.size(); ++i) {
        history_.push_back({ts[i], rs[i], std::string(phase)});
    }
    return rs;
}

qsim::GateSpec to_gate(const prune::QubitPair& pair, double angle) {
    return qsim::GateSpec::crx(pair.control, pair.target, angle);
}

qsim::Topology to_topology(std::span<const prune::QubitPair> pairs, double angle) {
    qsim::Topology t;
    t.gates.reserve(pairs.size());
    for (const auto& p : pairs) {
        t.gates.push_back(to_gate(p, angle));
    }
    return t;
}

std::vector<prune::QubitPair> unused_candidates(const qsim::Topology& seq, const prune::CandidateSet& cands) {
    std::vector<prune::QubitPair> out;
    for (const auto& p : cands.pairs) {
        const bool used = std::any_of(seq.gates.begin(), seq.gates.end(), [&](const qsim::GateSpec& g) {
            return g.control && *g.control == p.control && g.target == p.target;
        });
        if (!used) {
            out.push_back(p);
        }
    }
    return out;
}

namespace {

std::optional<Move> argmin(std::vector<qsim::Topology>& ts, const std::vector<cost::CostReport>& costs) {
    if (ts.empty()) {
        return std::nullopt;
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < costs.size(); ++i) {
        if (costs[i].total < costs[best].total) {
            best = i;
        }
    }
    return Move{std::move(ts[best]), costs[best]};
}

} // namespace

std::optional<Move> best_insertion(Evaluator& eval, const qsim::Topology& seq, const prune::CandidateSet& cands) {
    std::vector<qsim::Topology> trials;
    for (const auto& p : unused_candidates(seq, cands)) {
        for (std::size_t pos = 0; pos <= seq.size(); ++pos) {
            qsim::Topology t = seq;
            t.gates.insert(t.gates.begin() + static_cast<std::ptrdiff_t>(pos), to_gate(p));
            trials.push_back(std::move(t));
        }
    }
    const auto costs = eval.batch(trials, "insertion");
    return argmin(trials, costs);
}

std::optional<Move> best_permutation_addition(Evaluator& eval, const qsim::Topology& seq,
                                              const prune::CandidateSet& cands, int n) {
    if (n < 1) {
        throw Error("permutation length must be at least 1");
    }
    const auto rem = unused_candidates(seq, cands);
    const auto k = static_cast<std::size_t>(n);
    if (rem.size() < k) {
        return std::nullopt;
    }

    // Ordered k-permutations of rem, lexicographic in candidate order.
    std::vector<qsim::Topology> trials;
    std::vector<std::size_t> pick;
    std::vector<bool> taken(rem.size(), false);
    auto recurse = [&](auto&& self) -> void {
        if (pick.size() == k) {
            qsim::Topology t = seq;
            for (const auto i : pick) {
                t.gates.push_back(to_gate(rem[i]));
            }
            trials.push_back(std::move(t));
            return;
        }
        for (std::size_t i = 0; i < rem.size(); ++i) {
            if (taken[i]) {
                continue;
            }
            taken[i] = true;
            pick.push_back(i);
            self(self);
            pick.pop_back();
            taken[i] = false;
        }
    };
    recurse(recurse);

    const auto costs = eval.batch(trials, "addition");
    return argmin(trials, costs);
}

std::optional<Move> best_deletion(Evaluator& eval, const qsim::Topology& seq) {
    std::vector<qsim::Topology> trials;
    for (std::size_t pos = 0; pos < seq.size(); ++pos) {
        qsim::Topology t = seq;
        t.gates.erase(t.gates.begin() + static_cast<std::ptrdiff_t>(pos));
        trials.push_back(std::move(t));
    }
    const auto costs = eval.batch(trials, "deletion");
    return argmin(trials, costs);
}

SearchResult local_search(const cost::Problem& problem, const prune::CandidateSet& cands, const SearchConfig& cfg) {
    cfg.validate();
    Evaluator eval(problem, cfg.workers);

    qsim::Topology best;
    cost::CostReport best_cost = eval(best, "baseline");
    const auto depth = static_cast<std::size_t>(cfg.max_depth);

    bool improved = !cands.empty();
    while (improved) {
        improved = false;

        if (best.size() < depth) {
            if (auto m = best_insertion(eval, best, cands); m && m->cost.total < best_cost.total - cfg.kl_tol) {
                best = std::move(m->topology);
                best_cost = m->cost;
                improved = true;
            }
        }

        if (best.size() + static_cast<std::size_t>(cfg.n_choose) <= depth) {
            if (auto m = best_permutation_addition(eval, best, cands, cfg.n_choose);
                m && m->cost.total < best_cost.total - cfg.kl_tol) {
                best = std::move(m->topology);
                best_cost = m->cost;
                improved = true;
            }
        }

        if (auto m = best_deletion(eval, best); m && m->cost.total < best_cost.total - cfg.eps_prune) {
            best = std::move(m->topology);
            best_cost = m->cost;
            improved = true;
        }
    }

    SearchResult r;
    r.topology = std::move(best);
    r.cost = best_cost;
    r.evaluations = eval.evaluations();
    r.history = eval.take_history();
    return r;
}

namespace {

std::vector<prune::QubitPair> shuffled(std::vector<prune::QubitPair> v, std::uint64_t seed) {
    // Fisher-Yates on a fully specified engine so the order is portable.
    std::mt19937_64 rng(seed);
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
    return v;
}

struct Path {
    qsim::Topology topology;
    cost::CostReport cost;
};

Path greedy_forward(Evaluator& eval, Path path, const prune::CandidateSet& cands, std::size_t max_depth) {
    while (path.topology.size() < max_depth) {
        std::vector<qsim::Topology> trials;
        for (const auto& p : unused_candidates(path.topology, cands)) {
            qsim::Topology t = path.topology;
            t.gates.push_back(to_gate(p));
            trials.push_back(std::move(t));
        }
        const auto costs = eval.batch(trials, "forward");
        auto m = argmin(trials, costs);
        if (!m || !(m->cost.total < path.cost.total)) {
            break;
        }
        path = {std::move(m->topology), m->cost};
    }
    return path;
}

Path greedy_removal(Evaluator& eval, Path path, double margin) {
    while (path.topology.size() > 1) {
        auto m = best_deletion(eval, path.topology);
        if (!m || !(m->cost.total < path.cost.total - margin)) {
            break;
        }
        path = {std::move(m->topology), m->cost};
    }
    return path;
}

std::string sequence_key(const qsim::Topology& t) {
    std::string key;
    for (const auto& g : t.gates) {
        key += qsim::to_string(g.kind);
        key += ':';
        key += std::to_string(g.control.value_or(-1));
        key += ':';
        key += std::to_string(g.target);
        key += ':';
        key += std::to_string(std::bit_cast<std::uint64_t>(g.angle));
        key += ';';
    }
    return key;
}

} // namespace

std::size_t occam_select(std::span<const TraceRecord> history, double kl_tol) {
    if (history.empty()) {
        throw Error("Occam selection over an empty history");
    }
    std::vector<std::size_t> unique;
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < history.size(); ++i) {
        if (seen.emplace(sequence_key(history[i].sequence), i).second) {
            unique.push_back(i);
        }
    }
    std::stable_sort(unique.begin(), unique.end(), [&](std::size_t a, std::size_t b) {
        return history[a].sequence.size() < history[b].sequence.size();
    });

    std::size_t chosen = unique.front();
    for (const auto i : unique) {
        if (history[i].cost.total < history[chosen].cost.total - kl_tol) {
            chosen = i;
        }
    }
    return chosen;
}

SearchResult multi_epoch(const cost::Problem& problem, const prune::CandidateSet& cands, const SearchConfig& cfg) {
    cfg.validate();
    Evaluator eval(problem, cfg.workers);

    const qsim::Topology empty;
    const cost::CostReport baseline = eval(empty, "baseline");
    Path best{empty, baseline};

    const auto order = shuffled(cands.pairs, cfg.shuffle_seed);
    const auto epochs = std::min<std::size_t>(cfg.n_epochs ? static_cast<std::size_t>(*cfg.n_epochs) : order.size(),
                                              order.size());
    const auto depth = static_cast<std::size_t>(cfg.max_depth);
    const double refine_margin = 0.3 * cfg.kl_tol;

    for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
        qsim::Topology start;
        start.gates.push_back(to_gate(order[epoch]));
        const cost::CostReport start_cost = eval(start, "epoch-start");
        if (!(start_cost.total < baseline.total)) {
            continue;
        }

        Path path = greedy_forward(eval, {std::move(start), start_cost}, cands, depth);
        if (path.cost.total < best.cost.total) {
            best = path;
            Path refined = greedy_removal(eval, best, refine_margin);
            if (refined.cost.total < best.cost.total) {
                best = std::move(refined);
            }
        }
    }

    SearchResult r;
    r.evaluations = eval.evaluations();
    r.history = eval.take_history();
    const std::size_t pick = occam_select(r.history, cfg.kl_tol);
    r.topology = r.history[pick].sequence;
    r.cost = r.history[pick].cost;
    return r;
}

SearchResult order_selected(const cost::Problem& problem, std::span<const prune::QubitPair> gates,
                            const SearchConfig& cfg) {
    cfg.validate();
    SearchResult r;
    if (gates.empty()) {
        Evaluator eval(problem, cfg.workers);
        r.cost = eval(r.topology, "ordering");
        r.evaluations = eval.evaluations();
        r.history = eval.take_history();
        return r;
    }

    if (gates.size() <= kMaxExhaustiveOrdering) {
        Evaluator eval(problem, cfg.workers);
        std::vector<std::size_t> perm(gates.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});

        std::optional<Move> best;
        constexpr std::size_t kChunk = 512;
        std::vector<qsim::Topology> chunk;
        auto flush = [&] {
            const auto costs = eval.batch(chunk, "ordering");
            for (std::size_t i = 0; i < chunk.size(); ++i) {
                if (!best || costs[i].total < best->cost.total) {
                    best = Move{chunk[i], costs[i]};
                }
            }
            chunk.clear();
        };
        do {
            qsim::Topology t;
            for (const auto i : perm) {
                t.gates.push_back(to_gate(gates[i]));
            }
            chunk.push_back(std::move(t));
            if (chunk.size() == kChunk) {
                flush();
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        flush();

        r.topology = std::move(best->topology);
        r.cost = best->cost;
        r.evaluations = eval.evaluations();
        r.history = eval.take_history();
        return r;
    }

    // Too many gates to enumerate orderings: multi-epoch over the selection, seeded
    // with the given ordering so the result never loses to it.
    prune::CandidateSet restricted;
    restricted.pairs.assign(gates.begin(), gates.end());
    SearchConfig sub = cfg;
    sub.max_depth = std::max(cfg.max_depth, static_cast<int>(gates.size()));
    r = multi_epoch(problem, restricted, sub);

    const qsim::Topology identity = to_topology(gates);
    const cost::CostReport identity_cost = cost::evaluate(problem, identity);
    ++r.evaluations;
    r.history.push_back({identity, identity_cost, "ordering"});
    if (identity_cost.total < r.cost.total) {
        r.topology = identity;
        r.cost = identity_cost;
    }
    return r;
}

void write_trace(std::ostream& out, std::span<const TraceRecord> history) {
    for (const auto& rec : history) {
        nlohmann::json seq = nlohmann::json::array();
        for (const auto& g : rec.sequence.gates) {
            seq.push_back({g.control.value_or(-1), g.target, g.angle});
        }
        const nlohmann::json line = {{"phase", rec.phase},
                                     {"sequence", seq},
                                     {"total", rec.cost.total},
                                     {"kl_ct1", rec.cost.kl_ct1},
                                     {"kl_ct2", rec.cost.kl_ct2}};
        out << line.dump() << '\n';
    }
}

} // namespace qxct::search
