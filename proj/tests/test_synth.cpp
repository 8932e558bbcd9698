#include "qxct/common.hpp"
#include "qxct/synth.hpp"

#include "doctest.h"
#include "support.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace qxct;
using namespace qxct::synth;

namespace {

/// One sender and one receiver at the same spot; gene 0 is the ligand, gene 1 its receptor.
TissueConfig two_cells() {
    TissueConfig cfg;
    cfg.groups = {1, 1, 0, 0};
    cfg.positions = {{0.0, 0.0}, {0.0, 0.0}};
    cfg.gene_names = {"lig", "rec"};
    cfg.grn = Eigen::MatrixXd::Zero(2, 2);
    cfg.channels = {{0, 1, true, false}};
    cfg.sender_shift = {0};
    cfg.baseline_noise = 1e-12;
    return cfg;
}

double active_fraction(const TissueOutput& out, Group group, std::size_t gene) {
    double on = 0.0;
    double n = 0.0;
    for (std::size_t i = 0; i < out.cell_labels.size(); ++i) {
        if (out.cell_labels[i] == group) {
            n += 1.0;
            on += out.observed(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(gene)) > 0 ? 1.0 : 0.0;
        }
    }
    return on / n;
}

} // namespace

TEST_CASE("kernel") {
    const double s = 1.0;
    const auto w = kernel_matrix({{0.0, 0.0}, {0.0, 0.0}, {s * std::sqrt(2.0), 0.0}, {5.0, 5.0}}, s);
    CHECK(w(0, 1) == 1.0);
    CHECK(w(0, 2) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
    CHECK(w.diagonal().isZero());
    CHECK(w.isApprox(w.transpose(), 0.0));

    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const double d1 = testing::uniform(rng, 0.0, 5.0);
        const double d2 = d1 + testing::uniform(rng, 0.0, 5.0);
        const auto k = kernel_matrix({{0.0, 0.0}, {d1, 0.0}, {0.0, d2}}, testing::uniform(rng, 0.1, 3.0));
        REQUIRE(k(0, 1) >= k(0, 2));
    }
}

TEST_CASE("receptor response on two cells") {
    const auto cfg = two_cells();
    const auto on = simulate(cfg, true);
    const auto off = simulate(cfg, false);
    const double ligand = on.latent(0, 0);
    CHECK(ligand == doctest::Approx(cfg.baseline_mean + cfg.ligand_shift).epsilon(1e-9));
    CHECK(on.latent(1, 1) == doctest::Approx(off.latent(1, 1) + std::log1p(std::exp(ligand))).epsilon(1e-12));
    CHECK(on.latent(0, 1) == off.latent(0, 1));

    auto silent = cfg;
    silent.signal_strength = 0.0;
    CHECK(simulate(silent, true).latent == off.latent);
}

TEST_CASE("GRN increments follow relative activation") {
    auto cfg = two_cells();
    cfg.gene_names = {"lig", "rec", "down"};
    cfg.grn = Eigen::MatrixXd::Zero(3, 3);
    cfg.grn(2, 1) = 1.0;
    const auto on = simulate(cfg, true);
    // Receiver: the receptor is above threshold, so "down" moves by (x_rec - mu0).
    CHECK(on.latent(1, 2) == doctest::Approx(cfg.baseline_mean + on.latent(1, 1) - cfg.baseline_mean).epsilon(1e-9));
    // Sender: the receptor stays at baseline, below the threshold.
    CHECK(on.latent(0, 2) == doctest::Approx(cfg.baseline_mean).epsilon(1e-9));

    auto cyclic = cfg;
    cyclic.grn(1, 2) = 1.0;
    CHECK_THROWS_AS(simulate(cyclic, true), Error);
}

TEST_CASE("measurement model") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(1000, 100, -2.0);
    CHECK(measure(x, 2.0, 1.0, 1).isZero());

    const auto y = measure(x, 2.0, 0.0, 7);
    const double mean = static_cast<double>(y.sum()) / static_cast<double>(y.size());
    CHECK(mean == doctest::Approx(std::exp(-2.0)).epsilon(0.05));
    CHECK(y.minCoeff() >= 0);
    CHECK(sparsity(y) > 0.8);
    CHECK(measure(x, 2.0, 0.4, 7) == measure(x, 2.0, 0.4, 7));

    // Variance m + m^2 / phi.
    const Eigen::MatrixXd big = Eigen::MatrixXd::Constant(500, 200, std::log(4.0));
    const Eigen::MatrixXd z = measure(big, 2.0, 0.0, 3).cast<double>();
    const double m = z.mean();
    const double var = (z.array() - m).square().sum() / static_cast<double>(z.size() - 1);
    CHECK(m == doctest::Approx(4.0).epsilon(0.03));
    CHECK(var == doctest::Approx(4.0 + 16.0 / 2.0).epsilon(0.06));
}

TEST_CASE("config validation") {
    auto cfg = two_cells();
    cfg.dropout_rate = 1.5;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = two_cells();
    cfg.kernel_sigma = 0.0;
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = two_cells();
    cfg.grn = Eigen::MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(cfg.validate(), Error);
    cfg = two_cells();
    cfg.positions.pop_back();
    CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("layout") {
    const GroupSizes g;
    const auto labels = cell_labels(g);
    CHECK(labels.size() == 300);
    CHECK(labels.front() == Group::Sender);
    CHECK(labels.back() == Group::LoneReceiver);
    const auto pos = default_positions(g, 0);
    REQUIRE(pos.size() == 300);
    CHECK(pos == default_positions(g, 0));
    for (std::size_t i = 0; i < pos.size(); ++i) {
        if (labels[i] == Group::LoneSender) {
            REQUIRE(pos[i].x < -5.0);
        } else if (labels[i] == Group::LoneReceiver) {
            REQUIRE(pos[i].x > 5.0);
        } else {
            REQUIRE(std::abs(pos[i].x) < 2.0);
        }
    }
}

TEST_CASE("benchmark tissue") {
    const auto preset = benchmark_preset(Ct2Variant::FourGene, 0);
    CHECK(preset.config.gene_count() == 100);
    CHECK(preset.ct1.genes == std::vector<std::string>{"g50", "g90"});
    CHECK(preset.ct2.genes == std::vector<std::string>{"g60", "g70", "g71", "g80"});
    CHECK(benchmark_preset(Ct2Variant::FiveGene, 0).ct2.genes.back() == "g72");

    auto has = [&](const std::string& s, const std::string& t, const std::string& kind, bool spatial) {
        return std::any_of(preset.ground_truth.begin(), preset.ground_truth.end(), [&](const GroundTruthEdge& e) {
            return e.source == s && e.target == t && e.kind == kind && e.spatial == spatial;
        });
    };
    CHECK(has("g50", "g60", "forward", true));
    CHECK(has("g80", "g90", "retrograde", true));
    CHECK(has("g73", "g74", "autonomous", false));
    CHECK(has("g73", "g75", "autonomous", false));

    const auto on = simulate(preset.config, true);
    const auto off = simulate(preset.config, false);
    const double s = sparsity(on.observed);
    CHECK(s >= 0.85);
    CHECK(s <= 0.94);

    const std::set<Eigen::Index> touched{60, 70, 71, 72, 80, 90};
    for (Eigen::Index k = 0; k < 100; ++k) {
        if (!touched.contains(k)) {
            REQUIRE(on.latent.col(k) == off.latent.col(k));
        }
    }
    CHECK(active_fraction(on, Group::Receiver, 60) - active_fraction(on, Group::LoneReceiver, 60) > 0.2);

    const auto again = simulate(preset.config, true);
    CHECK(again.latent == on.latent);
    CHECK(again.observed == on.observed);
}

TEST_CASE("paired datasets") {
    const auto preset = benchmark_preset(Ct2Variant::FourGene, 1);
    const auto d = generate_paired(preset.config);
    CHECK(d.co_ct1.cell_count() == 100);
    CHECK(d.co_ct2.cell_count() == 100);
    CHECK(d.mono_ct1.cell_count() == 100);
    CHECK(d.co_ct1.gene_count() == 100);
    CHECK(d.co_ct1.values == group_counts(d.interacting, Group::Sender).values);
    CHECK(d.mono_ct2.values == group_counts(d.isolated, Group::Receiver).values);

    std::ostringstream labels;
    write_labels(labels, d.interacting);
    const auto text = labels.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 301);
    std::ostringstream truth;
    write_ground_truth(truth, preset.ground_truth);
    CHECK(truth.str().find("g50") != std::string::npos);
}
