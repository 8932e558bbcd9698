#include "qxct/common.hpp"
#include "qxct/cost.hpp"
#include "qxct/prune.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <numbers>

using namespace qxct;
using namespace qxct::qsim;

namespace {

Distribution dist(std::vector<double> p) {
    const int n = static_cast<int>(std::log2(p.size()));
    return {n, std::move(p)};
}

cost::Problem toy_problem() {
    const RegisterLayout layout{1, 1};
    return {tensor(StateVector::basis(1, 1), StateVector::basis(1, 0), layout), layout, dist({0.0, 1.0}),
            dist({0.0, 1.0})};
}

} // namespace

TEST_CASE("KL divergence by hand") {
    CHECK(cost::kl_divergence(dist({0.25, 0.25, 0.25, 0.25}), dist({0.25, 0.25, 0.25, 0.25})) <= 2e-9 * 4);
    CHECK(cost::kl_divergence(dist({1.0, 0.0}), dist({0.5, 0.5}), 1e-15) ==
          doctest::Approx(std::numbers::ln2).epsilon(1e-12));
    CHECK(cost::kl_divergence(dist({0.75, 0.25}), dist({0.5, 0.5})) ==
          doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)).epsilon(1e-8));
    // Target zero where p has mass: smoothing keeps the value finite.
    const double big = cost::kl_divergence(dist({0.5, 0.5}), dist({1.0, 0.0}));
    CHECK(std::isfinite(big));
    CHECK(big > 5.0);
}

TEST_CASE("KL divergence is non-negative and zero on itself (property)") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 5);
        const auto p = testing::random_distribution(n, rng, 0.3);
        const auto q = testing::random_distribution(n, rng, 0.3);
        REQUIRE(cost::kl_divergence(p, q) >= -1e-12);
        REQUIRE(std::abs(cost::kl_divergence(p, p)) < 1e-7);
    }
}

TEST_CASE("evaluate") {
    SUBCASE("empty circuit against its own marginals is free") {
        std::mt19937_64 rng(2);
        const RegisterLayout layout{2, 2};
        const auto init = tensor(testing::random_population(2, rng), testing::random_population(2, rng), layout);
        const cost::Problem p{init, layout, marginal_probabilities(init, layout.ct1()),
                              marginal_probabilities(init, layout.ct2())};
        CHECK(cost::evaluate(p, {}).total < 1e-7);
    }
    SUBCASE("a flipping gate lowers the CT2 term") {
        const auto p = toy_problem();
        const auto before = cost::evaluate(p, {});
        const auto after = cost::evaluate(p, {{GateSpec::crx(0, 1, std::numbers::pi)}});
        CHECK(after.kl_ct2 < before.kl_ct2);
        CHECK(after.kl_ct1 == doctest::Approx(before.kl_ct1));
        CHECK(after.total == after.kl_ct1 + after.kl_ct2);
    }
    SUBCASE("total is the sum of the register terms") {
        std::mt19937_64 rng(12);
        const auto cands = testing::random_candidates(4, 4, rng);
        const auto p = testing::random_problem(2, 2, cands, rng);
        const auto r = cost::evaluate(p, testing::random_circuit(4, 5, rng));
        CHECK(r.total == r.kl_ct1 + r.kl_ct2);
    }
}

TEST_CASE("batch evaluation matches serial evaluation bitwise") {
    std::mt19937_64 rng(44);
    const auto cands = testing::random_candidates(5, 6, rng);
    const auto p = testing::random_problem(2, 3, cands, rng);
    std::vector<Topology> ts;
    for (int i = 0; i < 20; ++i) {
        ts.push_back(testing::random_circuit(5, 1 + rng() % 6, rng));
    }
    ts.push_back(ts.front());
    for (const int workers : {1, 3, 8}) {
        const auto batch = cost::evaluate_batch(p, ts, workers);
        REQUIRE(batch.size() == ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i) {
            REQUIRE(batch[i] == cost::evaluate(p, ts[i]));
        }
        CHECK(batch.front() == batch.back());
    }
    CHECK(cost::evaluate_batch(p, std::span(ts).first(1)).front() == cost::evaluate(p, ts.front()));
}

TEST_CASE("shots mode converges to exact mode") {
    std::mt19937_64 rng(90);
    const auto cands = testing::random_candidates(4, 3, rng);
    auto p = testing::random_problem(2, 2, cands, rng);
    const Topology t = testing::random_circuit(4, 4, rng);
    const double exact = cost::evaluate(p, t).total;
    p.eval_mode = cost::ShotsMode{1'000'000, 3};
    const double shots = cost::evaluate(p, t).total;
    CHECK(std::abs(shots - exact) < 0.01);
    CHECK(cost::evaluate(p, t) == cost::evaluate(p, t));
}

TEST_CASE("delta rho") {
    const auto d = prune::delta_rho(StateVector::basis(1, 0), StateVector::basis(1, 1));
    CHECK(d(0, 0) == std::complex<double>(-1.0));
    CHECK(d(1, 1) == std::complex<double>(1.0));
    CHECK(d(0, 1) == std::complex<double>(0.0));

    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = testing::random_state(3, rng);
        const auto b = testing::random_state(3, rng);
        const auto dr = prune::delta_rho(a, b);
        REQUIRE((dr - dr.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
        REQUIRE(std::abs(dr.trace()) < 1e-12);
        REQUIRE(prune::delta_rho(a, a).isZero());
    }
}

TEST_CASE("candidate extraction") {
    const RegisterLayout layout{1, 1};
    CHECK(prune::extract_candidates(ComplexMatrix::Zero(4, 4), layout, 0.01).empty());

    // |01> and |11> differ in bit 1 and share bit 0.
    ComplexMatrix dr = ComplexMatrix::Zero(4, 4);
    dr(0b01, 0b11) = 0.2;
    dr(0b11, 0b01) = 0.2;
    const auto c = prune::extract_candidates(dr, layout, 0.01);
    REQUIRE(c.size() == 1);
    CHECK(c.pairs[0] == prune::QubitPair{0, 1});
    CHECK(prune::extract_candidates(dr, layout, 0.3).empty());

    // Two flipped bits do not map to a gate.
    ComplexMatrix two = ComplexMatrix::Zero(4, 4);
    two(0b00, 0b11) = 0.5;
    CHECK(prune::extract_candidates(two, layout, 0.01).empty());
    CHECK_THROWS_AS(prune::extract_candidates(dr, layout, 0.0), Error);
    CHECK_THROWS_AS(prune::extract_candidates(dr, RegisterLayout{2, 1}, 0.01), Error);
}

TEST_CASE("raising the threshold only removes candidates (property)") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 30; ++trial) {
        const RegisterLayout layout{2, 2};
        const auto dr = prune::delta_rho(testing::random_state(4, rng), testing::random_state(4, rng));
        const auto loose = prune::extract_candidates(dr, layout, 0.01);
        const auto tight = prune::extract_candidates(dr, layout, 0.05);
        for (const auto& p : tight.pairs) {
            REQUIRE(std::find(loose.pairs.begin(), loose.pairs.end(), p) != loose.pairs.end());
            REQUIRE(p.control != p.target);
        }
    }
}
