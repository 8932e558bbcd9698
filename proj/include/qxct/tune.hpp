#pragma once

#include "qxct/cost.hpp"
#include "qxct/simplex.hpp"

#include <iosfwd>
#include <string>
#include <vector>

/**
 * @file tune.hpp
 *
 * @brief Continuous angle tuning of a fixed topology, prefix-wise contribution analysis
 * and export of the tuned circuit as a gene interaction network.
 */

namespace qxct::tune {

/// One angle per gate of a fixed topology, in radians. Stored unwrapped.
struct AngleVector {
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    /// Every angle reduced to [0, 2*pi).
    std::vector<double> wrapped() const;
};

double wrap_angle(double theta);

struct TuneResult {
    AngleVector angles;
    cost::CostReport cost;
    /// Cost with every angle at zero, i.e. the identity circuit.
    cost::CostReport initial_cost;
    std::size_t evaluations = 0;
};

/// Copy of `t` with gate i's angle replaced by angles[i].
qsim::Topology with_angles(const qsim::Topology& t, const AngleVector& angles);

/**
 * Tune every rotation angle from zero. If the tuned cost is still above the cost of
 * the topology as given, a second descent starts from the given angles and the better
 * result is kept, so the result never loses to the searched circuit.
 */
TuneResult optimize_angles(const cost::Problem& problem, const qsim::Topology& topology,
                           const SimplexOptions& options = {});

/// 100 * |delta| / baseline; 0 when the baseline is 0.
double percent_contribution(double kl_delta, double baseline);

struct ContributionRow {
    std::string source_gene;
    std::string target_gene;
    int control = 0;
    int target = 0;
    double angle = 0.0;
    double kl_after_prefix = 0.0;
    double kl_delta = 0.0;
    double percent = 0.0;
};

struct ContributionTable {
    double baseline_kl = 0.0;
    std::vector<ContributionRow> rows;

    double final_kl() const noexcept { return rows.empty() ? baseline_kl : rows.back().kl_after_prefix; }
};

/**
 * Row i is the cost after gates 1..i, in circuit order. `gene_map` names each qubit;
 * when empty, genes are written as q<index>.
 */
ContributionTable contribution_analysis(const cost::Problem& problem, const qsim::Topology& topology,
                                        const AngleVector& angles, const std::vector<std::string>& gene_map = {});

enum class EdgeClass { Intercellular, IntracellularCt1, IntracellularCt2 };

std::string to_string(EdgeClass c);

struct NetworkEdge {
    std::string source_gene;
    std::string target_gene;
    double angle = 0.0;
    EdgeClass edge_class = EdgeClass::Intercellular;
};

std::vector<NetworkEdge> export_network(const qsim::Topology& topology, const AngleVector& angles,
                                        const std::vector<std::string>& gene_map, const qsim::RegisterLayout& layout);

/// Tab-separated with a header row. Angles are written wrapped to [0, 2*pi).
void write_contributions(std::ostream& out, const ContributionTable& table);
void write_network(std::ostream& out, const std::vector<NetworkEdge>& edges);

} // namespace qxct::tune
