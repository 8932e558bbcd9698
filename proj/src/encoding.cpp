#include "qxct/encoding.hpp"
#include "qxct/common.hpp"

#include "json.hpp"

#include <istream>
#include <ostream>

namespace qxct {

using nlohmann::json;

namespace {

ingest::ExpressionMatrix drop_empty_cells(const ingest::ExpressionMatrix& m, std::size_t& dropped) {
    const Eigen::VectorXd sums = m.values.rowwise().sum();
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < sums.size(); ++r) {
        if (sums[r] > 0.0) {
            keep.push_back(r);
        }
    }
    dropped += static_cast<std::size_t>(sums.size()) - keep.size();
    ingest::ExpressionMatrix out;
    out.gene_names = m.gene_names;
    out.values.resize(static_cast<Eigen::Index>(keep.size()), m.values.cols());
    for (std::size_t i = 0; i < keep.size(); ++i) {
        out.values.row(static_cast<Eigen::Index>(i)) = m.values.row(keep[i]);
    }
    return out;
}

StateHistogram encode_one(const ingest::ExpressionMatrix& m, const ingest::GeneSelection& sel, std::size_t& dropped,
                          const std::string& what) {
    try {
        return ingest::binarize(ingest::log_normalize(drop_empty_cells(m, dropped)), sel);
    } catch (const Error& e) {
        throw Error(what + ": " + e.what());
    }
}

qsim::StateVector global_state(const StateHistogram& ct1, const StateHistogram& ct2,
                               const qsim::RegisterLayout& layout) {
    return qsim::tensor(qsim::from_amplitudes(ingest::amplitudes(ct1)), qsim::from_amplitudes(ingest::amplitudes(ct2)),
                        layout);
}

json histogram_json(const StateHistogram& h) {
    json j = json::object();
    for (const auto& [bits, n] : h.nonzero()) {
        j[bits] = n;
    }
    return j;
}

StateHistogram histogram_from_json(const json& j, int genes) {
    StateHistogram h(genes);
    for (const auto& [bits, n] : j.items()) {
        if (bits.size() != static_cast<std::size_t>(genes)) {
            throw Error("bitstring '" + bits + "' does not have " + std::to_string(genes) + " genes");
        }
        h.add(bits, n.get<std::uint64_t>());
    }
    return h;
}

json selection_json(const ingest::GeneSelection& s) { return {{"label", s.cell_type_label}, {"genes", s.genes}}; }

ingest::GeneSelection selection_from_json(const json& j) {
    return {j.at("label").get<std::string>(), j.at("genes").get<std::vector<std::string>>()};
}

} // namespace

void check_selection_sizes(const ingest::GeneSelection& ct1, const ingest::GeneSelection& ct2) {
    for (const auto* s : {&ct1, &ct2}) {
        if (s->genes.empty() || s->genes.size() > ingest::kMaxSelectedGenes) {
            throw Error("cell type '" + s->cell_type_label + "' needs 1.." + std::to_string(ingest::kMaxSelectedGenes) +
                        " genes, got " + std::to_string(s->genes.size()));
        }
    }
    const std::size_t total = ct1.genes.size() + ct2.genes.size();
    if (total > static_cast<std::size_t>(kMaxQubits)) {
        throw Error("selected genes need " + std::to_string(total) + " qubits; the limit is " +
                    std::to_string(kMaxQubits));
    }
}

qsim::RegisterLayout Encoding::layout() const {
    return {static_cast<int>(ct1.genes.size()), static_cast<int>(ct2.genes.size())};
}

std::vector<std::string> Encoding::gene_map() const {
    std::vector<std::string> out = ct1.genes;
    out.insert(out.end(), ct2.genes.begin(), ct2.genes.end());
    return out;
}

qsim::StateVector Encoding::mono_state() const { return global_state(mono_ct1, mono_ct2, layout()); }

qsim::StateVector Encoding::co_state() const { return global_state(co_ct1, co_ct2, layout()); }

cost::Problem Encoding::problem(cost::EvalMode mode) const {
    cost::Problem p{mono_state(), layout(), ingest::target_distribution(co_ct1), ingest::target_distribution(co_ct2),
                    mode};
    p.validate();
    return p;
}

Encoding encode(const ConditionMatrices& m, const ingest::GeneSelection& ct1, const ingest::GeneSelection& ct2) {
    check_selection_sizes(ct1, ct2);
    Encoding e;
    e.ct1 = ct1;
    e.ct2 = ct2;
    e.mono_ct1 = encode_one(m.mono_ct1, ct1, e.dropped_cells, "mono " + ct1.cell_type_label);
    e.mono_ct2 = encode_one(m.mono_ct2, ct2, e.dropped_cells, "mono " + ct2.cell_type_label);
    e.co_ct1 = encode_one(m.co_ct1, ct1, e.dropped_cells, "co " + ct1.cell_type_label);
    e.co_ct2 = encode_one(m.co_ct2, ct2, e.dropped_cells, "co " + ct2.cell_type_label);
    return e;
}

void write_encoding(std::ostream& out, const Encoding& e) {
    const auto tgt1 = ingest::target_distribution(e.co_ct1);
    const auto tgt2 = ingest::target_distribution(e.co_ct2);
    json j;
    j["ct1"] = selection_json(e.ct1);
    j["ct2"] = selection_json(e.ct2);
    j["layout"] = {{"ct1_qubits", e.layout().ct1_qubits}, {"ct2_qubits", e.layout().ct2_qubits}};
    j["dropped_cells"] = e.dropped_cells;
    j["histograms"] = {{"mono_ct1", histogram_json(e.mono_ct1)},
                       {"mono_ct2", histogram_json(e.mono_ct2)},
                       {"co_ct1", histogram_json(e.co_ct1)},
                       {"co_ct2", histogram_json(e.co_ct2)}};
    j["target_ct1"] = tgt1.probabilities;
    j["target_ct2"] = tgt2.probabilities;
    out << j.dump(2) << '\n';
}

Encoding read_encoding(std::istream& in, const std::string& source_name) {
    try {
        const json j = json::parse(in);
        Encoding e;
        e.ct1 = selection_from_json(j.at("ct1"));
        e.ct2 = selection_from_json(j.at("ct2"));
        check_selection_sizes(e.ct1, e.ct2);
        const auto n1 = static_cast<int>(e.ct1.genes.size());
        const auto n2 = static_cast<int>(e.ct2.genes.size());
        const auto& h = j.at("histograms");
        e.mono_ct1 = histogram_from_json(h.at("mono_ct1"), n1);
        e.mono_ct2 = histogram_from_json(h.at("mono_ct2"), n2);
        e.co_ct1 = histogram_from_json(h.at("co_ct1"), n1);
        e.co_ct2 = histogram_from_json(h.at("co_ct2"), n2);
        e.dropped_cells = j.value("dropped_cells", std::size_t{0});
        return e;
    } catch (const json::exception& ex) {
        throw Error(source_name + ": " + ex.what());
    }
}

} // namespace qxct
