#include "qxct/common.hpp"
#include "qxct/search.hpp"

#include "doctest.h"
#include "support.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

using namespace qxct;
using namespace qxct::qsim;
using namespace qxct::search;

namespace {

prune::CandidateSet cands_of(std::vector<prune::QubitPair> pairs) { return {std::move(pairs), 0.01}; }

/// CT1 = {q0, q1}, CT2 = {q2}, starting from q0 = 1. CRX(0->1) alone leaves the cost unchanged and
/// CRX(1->2) alone does nothing, but the two together match the CT2 target.
cost::Problem synergy_problem() {
    const RegisterLayout layout{2, 1};
    const auto init = tensor(StateVector::basis(2, 0b01), StateVector::basis(1, 0), layout);
    return {init, layout, Distribution{2, {0.0, 0.8, 0.0, 0.2}}, Distribution{1, {0.75, 0.25}}};
}

/// One qubit per register, q0 = 1; the CT2 target is what a single CRX(pi/2) 0->1 produces.
cost::Problem half_flip_problem() {
    const RegisterLayout layout{1, 1};
    const auto init = tensor(StateVector::basis(1, 1), StateVector::basis(1, 0), layout);
    return {init, layout, Distribution{1, {0.0, 1.0}}, Distribution{1, {0.5, 0.5}}};
}

bool in_history(const SearchResult& r) {
    return std::any_of(r.history.begin(), r.history.end(),
                       [&](const TraceRecord& h) { return h.sequence == r.topology && h.cost == r.cost; });
}

} // namespace

TEST_CASE("config validation") {
    SearchConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.kl_tol = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.n_choose = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.workers = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = {};
    cfg.n_epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("insertion neighbourhood size") {
    std::mt19937_64 rng(1);
    const auto cands = testing::random_candidates(3, 5, rng);
    const auto p = testing::random_problem(1, 2, cands, rng);
    Evaluator eval(p);
    const Topology seq = to_topology(std::span(cands.pairs).first(2));
    const auto m = best_insertion(eval, seq, cands);
    CHECK(eval.evaluations() == 9);
    REQUIRE(m);
    CHECK(m->topology.size() == 3);
    CHECK(m->cost == cost::evaluate(p, m->topology));

    Evaluator fresh(p);
    const auto single = best_insertion(fresh, {}, cands);
    REQUIRE(single);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& c : cands.pairs) {
        best = std::min(best, cost::evaluate(p, {{to_gate(c)}}).total);
    }
    CHECK(single->cost.total == best);

    Evaluator full(p);
    CHECK_FALSE(best_insertion(full, to_topology(cands.pairs), cands));
}

TEST_CASE("permutation addition neighbourhood size") {
    std::mt19937_64 rng(2);
    const auto cands = testing::random_candidates(3, 4, rng);
    const auto p = testing::random_problem(1, 2, cands, rng);
    Evaluator eval(p);
    const auto m = best_permutation_addition(eval, {}, cands, 2);
    CHECK(eval.evaluations() == 12);
    REQUIRE(m);
    CHECK(m->topology.size() == 2);

    Evaluator one(p);
    Evaluator ins(p);
    CHECK(best_permutation_addition(one, {}, cands, 1)->cost == best_insertion(ins, {}, cands)->cost);

    Evaluator few(p);
    CHECK_FALSE(best_permutation_addition(few, to_topology(std::span(cands.pairs).first(3)), cands, 2));
}

TEST_CASE("synergy is only found by permutation addition") {
    const auto p = synergy_problem();
    const auto cands = cands_of({{0, 1}, {1, 2}});
    const double base = cost::evaluate(p, {}).total;
    for (const auto& c : cands.pairs) {
        CHECK(cost::evaluate(p, {{to_gate(c)}}).total > base - 0.01);
    }
    Evaluator eval(p);
    const auto m = best_permutation_addition(eval, {}, cands, 2);
    REQUIRE(m);
    CHECK(m->cost.total < base - 0.2);
    CHECK(m->topology == to_topology(cands.pairs));

    const auto r = local_search(p, cands, {});
    CHECK(r.topology.size() == 2);
    CHECK(r.cost.total < base - 0.2);
}

TEST_CASE("deletion") {
    const auto p = half_flip_problem();
    Evaluator eval(p);
    CHECK_FALSE(best_deletion(eval, {}));

    const auto g = to_gate({0, 1});
    const Topology twice{{g, g}};
    const auto m = best_deletion(eval, twice);
    REQUIRE(m);
    CHECK(m->topology == Topology{{g}});
    CHECK(m->cost.total < cost::evaluate(p, twice).total);

    const auto single = best_deletion(eval, Topology{{g}});
    REQUIRE(single);
    CHECK(single->cost.total > cost::evaluate(p, {{g}}).total);
}

TEST_CASE("local search on small cases") {
    const auto p = half_flip_problem();
    const auto empty = local_search(p, cands_of({}), {});
    CHECK(empty.topology.empty());
    CHECK(empty.cost == cost::evaluate(p, {}));

    const auto one = local_search(p, cands_of({{0, 1}}), {});
    CHECK(one.topology == Topology{{to_gate({0, 1})}});
    CHECK(one.cost.total < 1e-6);
}

TEST_CASE("multi-epoch keeps the empty circuit when nothing helps") {
    // Target equals the initial marginals, so every gate can only hurt.
    const RegisterLayout layout{1, 1};
    const auto init = tensor(StateVector::basis(1, 1), StateVector::basis(1, 0), layout);
    const cost::Problem p{init, layout, Distribution{1, {0.0, 1.0}}, Distribution{1, {1.0, 0.0}}};
    const auto r = multi_epoch(p, cands_of({{0, 1}, {1, 0}}), {});
    CHECK(r.topology.empty());
    CHECK(r.cost == cost::evaluate(p, {}));
}

TEST_CASE("Occam selection") {
    const auto g = to_gate({0, 1});
    const auto h = to_gate({1, 0});
    std::vector<TraceRecord> hist{
        {{}, {0.50, 0.25, 0.25}, "baseline"},
        {{{g, h, g}}, {0.475, 0.2, 0.275}, "forward"},
        {{{g}}, {0.48, 0.2, 0.28}, "forward"},
    };
    CHECK(occam_select(hist, 0.01) == 2);
    hist[1].cost.total = 0.46;
    CHECK(occam_select(hist, 0.01) == 1);
    CHECK_THROWS_AS(occam_select({}, 0.01), Error);
}

TEST_CASE("Occam choice is within kl_tol of everything seen (property)") {
    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 500; ++trial) {
        std::vector<TraceRecord> hist;
        const auto n = 1 + rng() % 12;
        for (std::size_t i = 0; i < n; ++i) {
            // A repeated sequence has to repeat its cost, as it does in a real trace.
            TraceRecord rec{testing::random_circuit(3, rng() % 3, rng), {testing::uniform(rng, 0.0, 0.1), 0, 0}, "x"};
            for (const auto& h : hist) {
                if (h.sequence == rec.sequence) {
                    rec.cost = h.cost;
                }
            }
            hist.push_back(std::move(rec));
        }
        const auto pick = occam_select(hist, 0.01);
        for (const auto& h : hist) {
            REQUIRE(hist[pick].cost.total <= h.cost.total + 0.01);
        }
    }
}

TEST_CASE("ordering of a selected set") {
    std::mt19937_64 rng(9);
    const auto cands = testing::random_candidates(4, 3, rng);
    const auto p = testing::random_problem(2, 2, cands, rng);

    const auto single = order_selected(p, std::span(cands.pairs).first(1), {});
    CHECK(single.topology == Topology{{to_gate(cands.pairs[0])}});

    const auto three = order_selected(p, cands.pairs, {});
    CHECK(three.evaluations == 6);
    std::vector<std::size_t> perm{0, 1, 2};
    double best = std::numeric_limits<double>::infinity();
    do {
        Topology t;
        for (const auto i : perm) {
            t.gates.push_back(to_gate(cands.pairs[i]));
        }
        best = std::min(best, cost::evaluate(p, t).total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(three.cost.total == best);

    const auto nine_cands = testing::random_candidates(4, 9, rng);
    const auto p9 = testing::random_problem(2, 2, nine_cands, rng);
    const auto nine = order_selected(p9, nine_cands.pairs, {});
    CHECK(nine.cost.total <= cost::evaluate(p9, to_topology(nine_cands.pairs)).total);
    CHECK(nine.cost == cost::evaluate(p9, nine.topology));
}

TEST_CASE("search invariants on random problems (property)") {
    std::mt19937_64 rng(321);
    for (int trial = 0; trial < 12; ++trial) {
        const int total = 3 + trial % 3;
        const int ct1 = 1 + static_cast<int>(rng() % static_cast<unsigned>(total - 1));
        const auto cands = testing::random_candidates(total, 2 + rng() % 5, rng);
        const auto p = testing::random_problem(ct1, total - ct1, cands, rng);
        const double base = cost::evaluate(p, {}).total;
        SearchConfig cfg;
        cfg.shuffle_seed = trial;
        for (const auto& r : {local_search(p, cands, cfg), multi_epoch(p, cands, cfg)}) {
            REQUIRE(r.cost.total <= base);
            REQUIRE(r.cost == cost::evaluate(p, r.topology));
            REQUIRE(in_history(r));
            REQUIRE(r.evaluations == r.history.size());
            REQUIRE(r.topology.size() <= static_cast<std::size_t>(cfg.max_depth));
            for (const auto& g : r.topology.gates) {
                REQUIRE(g.kind == GateKind::CRX);
                REQUIRE(g.angle == kSearchAngle);
            }
        }
    }
}

TEST_CASE("results do not depend on the worker count") {
    std::mt19937_64 rng(77);
    const auto cands = testing::random_candidates(5, 8, rng);
    const auto p = testing::random_problem(2, 3, cands, rng);
    SearchConfig serial;
    SearchConfig parallel;
    parallel.workers = 4;
    const auto a = local_search(p, cands, serial);
    const auto b = local_search(p, cands, parallel);
    CHECK(a.topology == b.topology);
    CHECK(a.cost == b.cost);
    const auto c = multi_epoch(p, cands, serial);
    const auto d = multi_epoch(p, cands, parallel);
    CHECK(c.topology == d.topology);
    CHECK(c.cost == d.cost);
    CHECK(multi_epoch(p, cands, serial).topology == c.topology);
}

TEST_CASE("trace lines are JSON objects") {
    std::vector<TraceRecord> hist{{{{to_gate({0, 1})}}, {0.3, 0.1, 0.2}, "forward"}};
    std::ostringstream out;
    write_trace(out, hist);
    CHECK(out.str().find("\"phase\":\"forward\"") != std::string::npos);
    const auto text = out.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 1);
}
