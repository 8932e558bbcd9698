#include "qxct/synth.hpp"
#include "qxct/common.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <queue>
#include <random>

namespace qxct::synth {

namespace {

constexpr std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// SplitMix64 generator for the standard distributions. Each (seed, stream, cell, gene)
// tuple gets its own generator, so draws do not depend on evaluation order.
class Substream {
public:
    using result_type = std::uint64_t;

    Substream(std::uint64_t seed, std::uint64_t stream, std::uint64_t cell, std::uint64_t gene)
        : state_(splitmix(splitmix(splitmix(seed ^ (stream * 0xd1b54a32d192ed03ULL)) + cell) + gene)) {}

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

private:
    std::uint64_t state_;
};

enum Stream : std::uint64_t { kBaseline = 1, kPosition = 2, kCount = 3, kDropout = 4 };

std::vector<std::size_t> topological_order(const Eigen::MatrixXd& grn) {
    const auto g = static_cast<std::size_t>(grn.rows());
    std::vector<std::size_t> indegree(g, 0);
    for (std::size_t t = 0; t < g; ++t) {
        for (std::size_t k = 0; k < g; ++k) {
            if (grn(t, k) != 0.0) {
                ++indegree[t];
            }
        }
    }
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
    for (std::size_t t = 0; t < g; ++t) {
        if (indegree[t] == 0) {
            ready.push(t);
        }
    }
    std::vector<std::size_t> order;
    while (!ready.empty()) {
        const std::size_t k = ready.top();
        ready.pop();
        order.push_back(k);
        for (std::size_t t = 0; t < g; ++t) {
            if (grn(t, k) != 0.0 && --indegree[t] == 0) {
                ready.push(t);
            }
        }
    }
    if (order.size() != g) {
        throw Error("gene regulatory network has a cycle");
    }
    return order;
}

void check_gene(std::size_t gene, std::size_t count, const char* what) {
    if (gene >= count) {
        throw Error(std::string(what) + " gene index " + std::to_string(gene) + " is out of range");
    }
}

} // namespace

std::string to_string(Group g) {
    switch (g) {
    case Group::Sender:
        return "sender";
    case Group::Receiver:
        return "receiver";
    case Group::LoneSender:
        return "lone_sender";
    case Group::LoneReceiver:
        return "lone_receiver";
    }
    return "unknown";
}

bool is_sender(Group g) noexcept { return g == Group::Sender || g == Group::LoneSender; }

void TissueConfig::validate() const {
    if (groups.senders + groups.lone_senders == 0 || groups.receivers + groups.lone_receivers == 0) {
        throw Error("tissue needs at least one sender and one receiver cell");
    }
    if (!positions.empty() && positions.size() != groups.total()) {
        throw Error("expected " + std::to_string(groups.total()) + " positions, got " +
                    std::to_string(positions.size()));
    }
    if (!(kernel_sigma > 0.0)) {
        throw Error("kernel sigma must be positive");
    }
    if (!(signal_strength >= 0.0)) {
        throw Error("signal strength must be non-negative");
    }
    if (!(baseline_noise > 0.0)) {
        throw Error("baseline noise must be positive");
    }
    if (!(nb_dispersion > 0.0)) {
        throw Error("negative-binomial dispersion must be positive");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate <= 1.0)) {
        throw Error("dropout rate must lie in [0, 1]");
    }
    if (!(ligand_shift > 0.0)) {
        throw Error("ligand shift must be positive");
    }
    const std::size_t g = gene_count();
    if (g == 0) {
        throw Error("tissue needs at least one gene");
    }
    if (grn.rows() != static_cast<Eigen::Index>(g) || grn.cols() != static_cast<Eigen::Index>(g)) {
        throw Error("GRN must be " + std::to_string(g) + " x " + std::to_string(g));
    }
    for (const auto& c : channels) {
        check_gene(c.ligand, g, "ligand");
        check_gene(c.receptor, g, "receptor");
    }
    for (const auto s : sender_shift) {
        check_gene(s, g, "shifted");
    }
    for (const auto s : global_shift) {
        check_gene(s, g, "shifted");
    }
    topological_order(grn);
}

Eigen::MatrixXd kernel_matrix(const std::vector<Point>& positions, double sigma) {
    if (!(sigma > 0.0)) {
        throw Error("kernel sigma must be positive");
    }
    const auto n = static_cast<Eigen::Index>(positions.size());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    const double denom = 2.0 * sigma * sigma;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double dx = positions[i].x - positions[j].x;
            const double dy = positions[i].y - positions[j].y;
            const double v = std::exp(-(dx * dx + dy * dy) / denom);
            w(i, j) = v;
            w(j, i) = v;
        }
    }
    return w;
}

std::vector<Group> cell_labels(const GroupSizes& groups) {
    std::vector<Group> labels;
    labels.reserve(groups.total());
    labels.insert(labels.end(), groups.senders, Group::Sender);
    labels.insert(labels.end(), groups.receivers, Group::Receiver);
    labels.insert(labels.end(), groups.lone_senders, Group::LoneSender);
    labels.insert(labels.end(), groups.lone_receivers, Group::LoneReceiver);
    return labels;
}

std::vector<Point> default_positions(const GroupSizes& groups, std::uint64_t seed) {
    const auto labels = cell_labels(groups);
    std::vector<Point> pts;
    pts.reserve(labels.size());
    constexpr double radius = 0.5;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        Point centre;
        switch (labels[i]) {
        case Group::Sender:
            centre = {0.0, 0.0};
            break;
        case Group::Receiver:
            centre = {0.5, 0.0};
            break;
        case Group::LoneSender:
            centre = {-10.0, 0.0};
            break;
        case Group::LoneReceiver:
            centre = {10.0, 0.0};
            break;
        }
        Substream rng(seed, kPosition, i, 0);
        const double r = radius * std::sqrt(rng.uniform());
        const double a = 2.0 * std::numbers::pi * rng.uniform();
        pts.push_back({centre.x + r * std::cos(a), centre.y + r * std::sin(a)});
    }
    return pts;
}

TissueOutput simulate(const TissueConfig& cfg, bool interaction_enabled) {
    cfg.validate();
    TissueOutput out;
    out.cell_labels = cell_labels(cfg.groups);
    out.positions = cfg.positions.empty() ? default_positions(cfg.groups, cfg.seed) : cfg.positions;
    out.gene_names = cfg.gene_names;

    const auto n = static_cast<Eigen::Index>(out.cell_labels.size());
    const auto g = static_cast<Eigen::Index>(cfg.gene_count());
    Eigen::MatrixXd& x = out.latent;
    x.resize(n, g);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index k = 0; k < g; ++k) {
            Substream rng(cfg.seed, kBaseline, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(k));
            x(i, k) = std::normal_distribution<double>(cfg.baseline_mean, cfg.baseline_noise)(rng);
        }
    }

    for (Eigen::Index i = 0; i < n; ++i) {
        for (const auto gene : cfg.global_shift) {
            x(i, static_cast<Eigen::Index>(gene)) += cfg.ligand_shift;
        }
        if (is_sender(out.cell_labels[i])) {
            for (const auto gene : cfg.sender_shift) {
                x(i, static_cast<Eigen::Index>(gene)) += cfg.ligand_shift;
            }
        }
    }

    const Eigen::MatrixXd w =
        interaction_enabled ? kernel_matrix(out.positions, cfg.kernel_sigma) : Eigen::MatrixXd();
    auto signal = [&](const SignalChannel& c) {
        const auto lig = static_cast<Eigen::Index>(c.ligand);
        const auto rec = static_cast<Eigen::Index>(c.receptor);
        Eigen::VectorXd incoming = Eigen::VectorXd::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (is_sender(out.cell_labels[i]) == c.from_senders) {
                continue;
            }
            double s = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (is_sender(out.cell_labels[j]) == c.from_senders) {
                    s += w(i, j) * std::exp(x(j, lig));
                }
            }
            incoming[i] = std::log1p(cfg.signal_strength * s);
        }
        x.col(rec) += incoming;
    };

    if (interaction_enabled) {
        for (const auto& c : cfg.channels) {
            if (!c.after_grn) {
                signal(c);
            }
        }
    }

    const auto order = topological_order(cfg.grn);
    const double mu0 = cfg.baseline_mean;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (const auto t : order) {
            double inc = 0.0;
            for (Eigen::Index k = 0; k < g; ++k) {
                const double a = cfg.grn(static_cast<Eigen::Index>(t), k);
                if (a != 0.0 && x(i, k) > cfg.activation_threshold) {
                    inc += a * (x(i, k) - mu0);
                }
            }
            x(i, static_cast<Eigen::Index>(t)) += inc;
        }
    }

    if (interaction_enabled) {
        for (const auto& c : cfg.channels) {
            if (c.after_grn) {
                signal(c);
            }
        }
    }

    out.observed = measure(x, cfg.nb_dispersion, cfg.dropout_rate, cfg.seed);
    return out;
}

CountMatrix measure(const Eigen::MatrixXd& latent, double phi, double dropout_rate, std::uint64_t seed) {
    if (!(phi > 0.0)) {
        throw Error("negative-binomial dispersion must be positive");
    }
    if (!(dropout_rate >= 0.0 && dropout_rate <= 1.0)) {
        throw Error("dropout rate must lie in [0, 1]");
    }
    CountMatrix y(latent.rows(), latent.cols());
    for (Eigen::Index i = 0; i < latent.rows(); ++i) {
        for (Eigen::Index k = 0; k < latent.cols(); ++k) {
            const auto cell = static_cast<std::uint64_t>(i);
            const auto gene = static_cast<std::uint64_t>(k);
            Substream count_rng(seed, kCount, cell, gene);
            Substream mask_rng(seed, kDropout, cell, gene);
            // Gamma-Poisson mixture: mean m, variance m + m^2 / phi.
            const double mean = std::exp(latent(i, k));
            const double rate = std::gamma_distribution<double>(phi, mean / phi)(count_rng);
            const auto count = rate > 0.0 ? std::poisson_distribution<std::int64_t>(rate)(count_rng) : 0;
            const bool kept = mask_rng.uniform() < 1.0 - dropout_rate;
            y(i, k) = kept ? count : 0;
        }
    }
    return y;
}

double sparsity(const CountMatrix& counts) {
    if (counts.size() == 0) {
        return 0.0;
    }
    return static_cast<double>((counts.array() == 0).count()) / static_cast<double>(counts.size());
}

BenchmarkPreset benchmark_preset(Ct2Variant variant, std::uint64_t seed) {
    constexpr std::size_t kGenes = 100;
    BenchmarkPreset p;
    TissueConfig& c = p.config;
    c.seed = seed;
    for (std::size_t k = 0; k < kGenes; ++k) {
        c.gene_names.push_back("g" + std::to_string(k));
    }
    c.grn = Eigen::MatrixXd::Zero(kGenes, kGenes);
    auto regulate = [&](std::size_t from, std::size_t to) { c.grn(static_cast<Eigen::Index>(to), static_cast<Eigen::Index>(from)) = 1.0; };
    regulate(60, 70);
    regulate(70, 71);
    regulate(70, 72);
    regulate(70, 80);
    regulate(73, 74);
    regulate(73, 75);
    c.channels = {SignalChannel{50, 60, true, false}, SignalChannel{80, 90, false, true}};
    c.sender_shift = {50};
    c.global_shift = {73};

    p.ct1 = {"CT1", {"g50", "g90"}};
    p.ct2 = {"CT2", {"g60", "g70", "g71", "g80"}};
    if (variant == Ct2Variant::FiveGene) {
        p.ct2.genes.push_back("g72");
    }
    p.ground_truth = {
        {"g50", "g60", "forward", true},   {"g60", "g70", "grn", false},       {"g70", "g71", "grn", false},
        {"g70", "g72", "grn", false},      {"g70", "g80", "grn", false},       {"g80", "g90", "retrograde", true},
        {"g73", "g74", "autonomous", false}, {"g73", "g75", "autonomous", false},
    };
    return p;
}

ingest::ExpressionMatrix group_counts(const TissueOutput& out, Group group) {
    ingest::ExpressionMatrix m;
    m.gene_names = out.gene_names;
    std::vector<Eigen::Index> rows;
    for (std::size_t i = 0; i < out.cell_labels.size(); ++i) {
        if (out.cell_labels[i] == group) {
            rows.push_back(static_cast<Eigen::Index>(i));
        }
    }
    m.values.resize(static_cast<Eigen::Index>(rows.size()), out.observed.cols());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        m.values.row(static_cast<Eigen::Index>(r)) = out.observed.row(rows[r]).cast<double>();
    }
    return m;
}

PairedDatasets generate_paired(const TissueConfig& cfg) {
    PairedDatasets d;
    d.isolated = simulate(cfg, false);
    d.interacting = simulate(cfg, true);
    d.mono_ct1 = group_counts(d.isolated, Group::Sender);
    d.mono_ct2 = group_counts(d.isolated, Group::Receiver);
    d.co_ct1 = group_counts(d.interacting, Group::Sender);
    d.co_ct2 = group_counts(d.interacting, Group::Receiver);
    return d;
}

void write_labels(std::ostream& out, const TissueOutput& tissue) {
    out.precision(17);
    out << "cell\tgroup\tx\ty\n";
    for (std::size_t i = 0; i < tissue.cell_labels.size(); ++i) {
        out << i << '\t' << to_string(tissue.cell_labels[i]) << '\t' << tissue.positions[i].x << '\t'
            << tissue.positions[i].y << '\n';
    }
}

void write_ground_truth(std::ostream& out, const std::vector<GroundTruthEdge>& edges) {
    out << "source\ttarget\tkind\tspatial\n";
    for (const auto& e : edges) {
        out << e.source << '\t' << e.target << '\t' << e.kind << '\t' << (e.spatial ? "true" : "false") << '\n';
    }
}

} // namespace qxct::synth
