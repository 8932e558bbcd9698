#include "qxct/tune.hpp"
#include "qxct/common.hpp"

#include <cmath>
#include <numbers>
#include <ostream>

namespace qxct::tune {

double wrap_angle(double theta) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double w = std::fmod(theta, two_pi);
    if (w < 0.0) {
        w += two_pi;
    }
    return w >= two_pi ? 0.0 : w;
}

std::vector<double> AngleVector::wrapped() const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const double v : values) {
        out.push_back(wrap_angle(v));
    }
    return out;
}

qsim::Topology with_angles(const qsim::Topology& t, const AngleVector& angles) {
    if (angles.size() != t.size()) {
        throw Error("angle vector has " + std::to_string(angles.size()) + " entries for " + std::to_string(t.size()) +
                    " gates");
    }
    qsim::Topology out = t;
    for (std::size_t i = 0; i < out.gates.size(); ++i) {
        out.gates[i].angle = angles.values[i];
    }
    return out;
}

TuneResult optimize_angles(const cost::Problem& problem, const qsim::Topology& topology,
                           const SimplexOptions& options) {
    for (std::size_t i = 0; i < topology.size(); ++i) {
        if (!topology.gates[i].is_rotation()) {
            throw Error("gate " + std::to_string(i) + " (" + qsim::to_string(topology.gates[i].kind) +
                        ") has no angle to tune");
        }
    }

    TuneResult r;
    std::size_t evals = 0;
    const Objective f = [&](std::span<const double> theta) {
        ++evals;
        qsim::Topology t = topology;
        for (std::size_t i = 0; i < theta.size(); ++i) {
            t.gates[i].angle = theta[i];
        }
        return cost::evaluate(problem, t).total;
    };

    const AngleVector zero{std::vector<double>(topology.size(), 0.0)};
    r.initial_cost = cost::evaluate(problem, with_angles(topology, zero));
    if (topology.empty()) {
        r.cost = r.initial_cost;
        return r;
    }

    auto best = minimize_simplex(f, zero.values, options);

    std::vector<double> given;
    for (const auto& g : topology.gates) {
        given.push_back(g.angle);
    }
    const double given_cost = cost::evaluate(problem, topology).total;
    ++evals;
    if (best.value > given_cost) {
        auto second = minimize_simplex(f, given, options);
        if (second.value < best.value) {
            best = std::move(second);
        }
    }

    r.angles.values = std::move(best.x);
    r.cost = cost::evaluate(problem, with_angles(topology, r.angles));
    r.evaluations = evals;
    return r;
}

double percent_contribution(double kl_delta, double baseline) {
    return baseline == 0.0 ? 0.0 : 100.0 * std::abs(kl_delta) / baseline;
}

namespace {

std::string gene_name(const std::vector<std::string>& gene_map, int qubit, bool require) {
    if (gene_map.empty() && !require) {
        return "q" + std::to_string(qubit);
    }
    if (qubit < 0 || static_cast<std::size_t>(qubit) >= gene_map.size() || gene_map[qubit].empty()) {
        throw Error("qubit " + std::to_string(qubit) + " has no gene name");
    }
    return gene_map[qubit];
}

} // namespace

ContributionTable contribution_analysis(const cost::Problem& problem, const qsim::Topology& topology,
                                        const AngleVector& angles, const std::vector<std::string>& gene_map) {
    const qsim::Topology tuned = with_angles(topology, angles);
    ContributionTable table;
    table.baseline_kl = cost::evaluate(problem, qsim::Topology{}).total;

    qsim::Topology prefix;
    double previous = table.baseline_kl;
    for (const auto& g : tuned.gates) {
        prefix.gates.push_back(g);
        const double kl = cost::evaluate(problem, prefix).total;
        ContributionRow row;
        row.control = g.control.value_or(g.target);
        row.target = g.target;
        row.source_gene = gene_name(gene_map, row.control, false);
        row.target_gene = gene_name(gene_map, row.target, false);
        row.angle = g.angle;
        row.kl_after_prefix = kl;
        row.kl_delta = kl - previous;
        row.percent = percent_contribution(row.kl_delta, table.baseline_kl);
        table.rows.push_back(std::move(row));
        previous = kl;
    }
    return table;
}

std::string to_string(EdgeClass c) {
    switch (c) {
    case EdgeClass::Intercellular:
        return "intercellular";
    case EdgeClass::IntracellularCt1:
        return "intracellular-CT1";
    case EdgeClass::IntracellularCt2:
        return "intracellular-CT2";
    }
    return "unknown";
}

std::vector<NetworkEdge> export_network(const qsim::Topology& topology, const AngleVector& angles,
                                        const std::vector<std::string>& gene_map, const qsim::RegisterLayout& layout) {
    const qsim::Topology tuned = with_angles(topology, angles);
    std::vector<NetworkEdge> edges;
    for (const auto& g : tuned.gates) {
        const int control = g.control.value_or(g.target);
        const auto rc = layout.register_of(control);
        const auto rt = layout.register_of(g.target);
        NetworkEdge e;
        e.source_gene = gene_name(gene_map, control, true);
        e.target_gene = gene_name(gene_map, g.target, true);
        e.angle = g.angle;
        e.edge_class = rc != rt                        ? EdgeClass::Intercellular
                       : rc == qsim::Register::Ct1 ? EdgeClass::IntracellularCt1
                                                   : EdgeClass::IntracellularCt2;
        edges.push_back(std::move(e));
    }
    return edges;
}

void write_contributions(std::ostream& out, const ContributionTable& table) {
    out.precision(17);
    out << "step\tsource_gene\ttarget_gene\tcontrol_qubit\ttarget_qubit\tangle\tkl_after_prefix\tkl_delta\tpercent\n";
    out << "0\t-\t-\t-\t-\t-\t" << table.baseline_kl << "\t0\t0\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& r = table.rows[i];
        out << i + 1 << '\t' << r.source_gene << '\t' << r.target_gene << '\t' << r.control << '\t' << r.target << '\t'
            << wrap_angle(r.angle) << '\t' << r.kl_after_prefix << '\t' << r.kl_delta << '\t' << r.percent << '\n';
    }
}

void write_network(std::ostream& out, const std::vector<NetworkEdge>& edges) {
    out.precision(17);
    out << "source_gene\ttarget_gene\tangle\tedge_class\n";
    for (const auto& e : edges) {
        out << e.source_gene << '\t' << e.target_gene << '\t' << wrap_angle(e.angle) << '\t' << to_string(e.edge_class)
            << '\n';
    }
}

} // namespace qxct::tune
