#pragma once

#include "qxct/ingest.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

/**
 * @file synth.hpp
 *
 * @brief Spatial tissue simulator with known ligand-receptor and gene-regulatory causality.
 *
 * Cells carry a latent log-expression state. Ligands are raised in sender cells, receptors
 * integrate kernel-weighted ligand signal from nearby senders, a gene regulatory network
 * propagates receptor activation downstream, and the latent state is observed through a
 * negative-binomial count model with dropout.
 */

namespace qxct::synth {

enum class Group { Sender, Receiver, LoneSender, LoneReceiver };

std::string to_string(Group g);
bool is_sender(Group g) noexcept;

struct Point {
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Point&) const = default;
};

struct GroupSizes {
    std::size_t senders = 100;
    std::size_t receivers = 100;
    std::size_t lone_senders = 50;
    std::size_t lone_receivers = 50;

    std::size_t total() const noexcept { return senders + receivers + lone_senders + lone_receivers; }
};

/// Ligand in the source cells raises the receptor in the opposite population.
struct SignalChannel {
    std::size_t ligand = 0;
    std::size_t receptor = 0;
    /// True: senders signal to receivers. False: receivers signal back to senders.
    bool from_senders = true;
    /// Applied after the GRN pass, so the ligand can itself be a GRN target.
    bool after_grn = false;
};

struct TissueConfig {
    GroupSizes groups;
    /// One per cell in group order (senders, receivers, lone senders, lone receivers); empty means generated.
    std::vector<Point> positions;
    double kernel_sigma = 1.0;
    double signal_strength = 1.0;
    double baseline_mean = -2.0;
    double baseline_noise = 0.3;
    std::vector<std::string> gene_names;
    /// grn(g, k) is the weight of regulator k on target g; the graph must be acyclic.
    Eigen::MatrixXd grn;
    std::vector<SignalChannel> channels;
    /// Genes raised by ligand_shift in every sender cell.
    std::vector<std::size_t> sender_shift;
    /// Genes raised by ligand_shift in every cell.
    std::vector<std::size_t> global_shift;
    double activation_threshold = -1.0;
    double ligand_shift = 3.0;
    double nb_dispersion = 2.0;
    double dropout_rate = 0.4;
    std::uint64_t seed = 0;

    std::size_t gene_count() const noexcept { return gene_names.size(); }
    void validate() const;
};

using CountMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Cells are rows, genes are columns.
struct TissueOutput {
    Eigen::MatrixXd latent;
    CountMatrix observed;
    std::vector<Group> cell_labels;
    std::vector<Point> positions;
    std::vector<std::string> gene_names;
};

/// W_ij = exp(-|P_i - P_j|^2 / (2 sigma^2)) off the diagonal, 0 on it.
Eigen::MatrixXd kernel_matrix(const std::vector<Point>& positions, double sigma);

/// Cell labels in the fixed group order.
std::vector<Group> cell_labels(const GroupSizes& groups);

/// Cluster layout: senders in a disc at the origin, receivers in a disc 0.5 to the right,
/// lone senders and lone receivers 10 units out on either side.
std::vector<Point> default_positions(const GroupSizes& groups, std::uint64_t seed);

TissueOutput simulate(const TissueConfig& cfg, bool interaction_enabled);

/// Y ~ NB(mean exp(x), dispersion phi) times Bernoulli(1 - dropout_rate), independently per entry.
CountMatrix measure(const Eigen::MatrixXd& latent, double phi, double dropout_rate, std::uint64_t seed);

/// Fraction of zero entries.
double sparsity(const CountMatrix& counts);

struct GroundTruthEdge {
    std::string source;
    std::string target;
    /// forward, grn, retrograde or autonomous.
    std::string kind;
    bool spatial = false;
};

/// 4 genes {g60, g70, g71, g80}, or 5 with g72 appended.
enum class Ct2Variant { FourGene, FiveGene };

struct BenchmarkPreset {
    TissueConfig config;
    ingest::GeneSelection ct1;
    ingest::GeneSelection ct2;
    std::vector<GroundTruthEdge> ground_truth;
};

/**
 * 100 genes g0..g99 with the three-stage circuit
 * g50 (ligand) -> g60 (receptor) -> g70 -> {g71, g72, g80 (ligand)} -> g90 (receptor)
 * plus the autonomous module g73 -> {g74, g75} raised in every cell.
 */
BenchmarkPreset benchmark_preset(Ct2Variant variant = Ct2Variant::FourGene, std::uint64_t seed = 0);

/// Non-interacting and interacting count matrices per cell type, from runs sharing one seed.
struct PairedDatasets {
    ingest::ExpressionMatrix mono_ct1;
    ingest::ExpressionMatrix mono_ct2;
    ingest::ExpressionMatrix co_ct1;
    ingest::ExpressionMatrix co_ct2;
    TissueOutput isolated;
    TissueOutput interacting;
};

/**
 * Runs the tissue with and without interaction. Senders are cell type 1 and receivers cell
 * type 2; mono matrices come from the run without interaction, co matrices from the run with it.
 */
PairedDatasets generate_paired(const TissueConfig& cfg);

/// Counts of the cells in `group` as an expression matrix over every gene.
ingest::ExpressionMatrix group_counts(const TissueOutput& out, Group group);

void write_labels(std::ostream& out, const TissueOutput& tissue);
void write_ground_truth(std::ostream& out, const std::vector<GroundTruthEdge>& edges);

} // namespace qxct::synth
