#include "qxct/artifacts.hpp"
#include "qxct/common.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace qxct::artifacts {

namespace {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, '\t')) {
        out.push_back(field);
    }
    if (!line.empty() && line.back() == '\t') {
        out.emplace_back();
    }
    return out;
}

template <typename T>
T parse_field(const std::string& text, const std::string& source, std::size_t row, std::size_t col) {
    T v{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || end != text.data() + text.size()) {
        throw ParseError(source, row, col, "cannot parse '" + text + "'");
    }
    return v;
}

std::string gene_or_dash(const std::vector<std::string>& gene_map, std::optional<int> q) {
    if (!q || static_cast<std::size_t>(*q) >= gene_map.size()) {
        return "-";
    }
    return gene_map[static_cast<std::size_t>(*q)];
}

// Yields (row number, fields) for every non-comment line after the header.
template <typename F>
void for_each_row(std::istream& in, const std::string& source, std::size_t columns, F&& f) {
    std::string line;
    std::size_t row = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header) {
            header = true;
            continue;
        }
        auto fields = split_tabs(line);
        if (fields.size() != columns) {
            throw ParseError(source, row, 1,
                             "expected " + std::to_string(columns) + " fields, got " + std::to_string(fields.size()));
        }
        f(row, fields);
    }
    if (!header) {
        throw ParseError(source, row + 1, 1, "missing header row");
    }
}

} // namespace

std::string format_double(double v) {
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

void write_candidates(std::ostream& out, const prune::CandidateSet& c, const std::vector<std::string>& gene_map) {
    out << "# threshold\t" << format_double(c.threshold_used) << '\n';
    out << "control_gene\ttarget_gene\tcontrol_qubit\ttarget_qubit\n";
    for (const auto& p : c.pairs) {
        out << gene_or_dash(gene_map, p.control) << '\t' << gene_or_dash(gene_map, p.target) << '\t' << p.control << '\t'
            << p.target << '\n';
    }
}

prune::CandidateSet read_candidates(std::istream& in, const std::string& source_name) {
    prune::CandidateSet c;
    std::string first;
    const auto start = in.tellg();
    if (std::getline(in, first) && first.rfind("# threshold\t", 0) == 0) {
        c.threshold_used = parse_field<double>(first.substr(12), source_name, 1, 13);
    } else {
        in.clear();
        in.seekg(start);
    }
    for_each_row(in, source_name, 4, [&](std::size_t row, const std::vector<std::string>& f) {
        c.pairs.push_back({parse_field<int>(f[2], source_name, row, 3), parse_field<int>(f[3], source_name, row, 4)});
    });
    return c;
}

void write_topology(std::ostream& out, const qsim::Topology& t, const std::vector<std::string>& gene_map) {
    out << "step\tgate\tcontrol_qubit\ttarget_qubit\tangle\tcontrol_gene\ttarget_gene\n";
    for (std::size_t i = 0; i < t.gates.size(); ++i) {
        const auto& g = t.gates[i];
        out << i + 1 << '\t' << qsim::to_string(g.kind) << '\t' << (g.control ? std::to_string(*g.control) : "-")
            << '\t' << g.target << '\t' << format_double(g.angle) << '\t' << gene_or_dash(gene_map, g.control) << '\t'
            << gene_or_dash(gene_map, g.target) << '\n';
    }
}

qsim::Topology read_topology(std::istream& in, const std::string& source_name) {
    qsim::Topology t;
    for_each_row(in, source_name, 7, [&](std::size_t row, const std::vector<std::string>& f) {
        qsim::GateSpec g;
        try {
            g.kind = qsim::gate_kind_from_string(f[1]);
        } catch (const Error& e) {
            throw ParseError(source_name, row, 2, e.what());
        }
        if (f[2] != "-") {
            g.control = parse_field<int>(f[2], source_name, row, 3);
        }
        g.target = parse_field<int>(f[3], source_name, row, 4);
        g.angle = parse_field<double>(f[4], source_name, row, 5);
        if (g.is_controlled() != g.control.has_value()) {
            throw ParseError(source_name, row, 3, "control qubit does not match gate " + f[1]);
        }
        t.gates.push_back(g);
    });
    return t;
}

} // namespace qxct::artifacts
