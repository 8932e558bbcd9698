#include "qxct/ingest.hpp"
#include "qxct/common.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

namespace qxct::ingest {

namespace {

std::vector<std::string_view> split(std::string_view line, char delimiter) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delimiter, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \r");
    return s.substr(first, last - first + 1);
}

} // namespace

std::size_t ExpressionMatrix::gene_index(std::string_view gene) const {
    const auto it = std::find(gene_names.begin(), gene_names.end(), gene);
    if (it == gene_names.end()) {
        throw Error("unknown gene '" + std::string(gene) + "'");
    }
    return static_cast<std::size_t>(it - gene_names.begin());
}

void ExpressionMatrix::validate() const {
    if (static_cast<std::size_t>(values.cols()) != gene_names.size()) {
        throw Error("matrix has " + std::to_string(values.cols()) + " columns but " +
                    std::to_string(gene_names.size()) + " gene names");
    }
    std::unordered_set<std::string> seen;
    for (const auto& g : gene_names) {
        if (!seen.insert(g).second) {
            throw Error("duplicate gene name '" + g + "'");
        }
    }
    for (Eigen::Index r = 0; r < values.rows(); ++r) {
        for (Eigen::Index c = 0; c < values.cols(); ++c) {
            if (!(values(r, c) >= 0.0) || !std::isfinite(values(r, c))) {
                throw Error("negative or non-finite expression value at cell " + std::to_string(r) + ", gene '" +
                            gene_names[static_cast<std::size_t>(c)] + "'");
            }
        }
    }
}

ExpressionMatrix parse_matrix(std::istream& in, DelimitedFormat format, const std::string& source_name) {
    std::string line;
    if (!std::getline(in, line)) {
        throw ParseError(source_name, 1, 1, "missing header row");
    }
    char delimiter = format.delimiter;
    if (delimiter == 0) {
        delimiter = line.find('\t') != std::string::npos ? '\t' : ',';
    }

    ExpressionMatrix m;
    std::unordered_set<std::string> seen;
    std::size_t column = 1;
    for (const auto field : split(line, delimiter)) {
        const auto name = std::string(trim(field));
        if (name.empty()) {
            throw ParseError(source_name, 1, column, "empty gene name");
        }
        if (!seen.insert(name).second) {
            throw ParseError(source_name, 1, column, "duplicate gene name '" + name + "'");
        }
        m.gene_names.push_back(name);
        ++column;
    }

    const std::size_t ncols = m.gene_names.size();
    std::vector<double> buffer;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line, delimiter);
        if (fields.size() != ncols) {
            throw ParseError(source_name, row, std::min(fields.size(), ncols) + 1,
                             "ragged row: expected " + std::to_string(ncols) + " fields, found " +
                                 std::to_string(fields.size()));
        }
        for (std::size_t c = 0; c < ncols; ++c) {
            const auto text = trim(fields[c]);
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (text.empty() || ec != std::errc{} || ptr != text.data() + text.size()) {
                throw ParseError(source_name, row, c + 1, "non-numeric value '" + std::string(text) + "'");
            }
            if (!(value >= 0.0) || !std::isfinite(value)) {
                throw ParseError(source_name, row, c + 1, "negative or non-finite value '" + std::string(text) + "'");
            }
            buffer.push_back(value);
        }
    }

    const std::size_t ncells = ncols == 0 ? 0 : buffer.size() / ncols;
    if (ncells == 0) {
        throw ParseError(source_name, row, 1, "no cells");
    }
    m.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        buffer.data(), static_cast<Eigen::Index>(ncells), static_cast<Eigen::Index>(ncols));
    return m;
}

ExpressionMatrix load_matrix(const std::filesystem::path& path, DelimitedFormat format) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open matrix file '" + path.string() + "'");
    }
    return parse_matrix(in, format, path.string());
}

void write_matrix(std::ostream& out, const ExpressionMatrix& m, char delimiter) {
    for (std::size_t c = 0; c < m.gene_names.size(); ++c) {
        if (c) {
            out << delimiter;
        }
        out << m.gene_names[c];
    }
    out << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
            if (c) {
                out << delimiter;
            }
            const auto res = std::to_chars(buf, buf + sizeof(buf), m.values(r, c));
            out.write(buf, res.ptr - buf);
        }
        out << '\n';
    }
}

void save_matrix(const std::filesystem::path& path, const ExpressionMatrix& m, char delimiter) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write matrix file '" + path.string() + "'");
    }
    write_matrix(out, m, delimiter);
}

ExpressionMatrix log_normalize(const ExpressionMatrix& m) {
    if (m.values.rows() == 0) {
        throw Error("no cells");
    }
    const Eigen::VectorXd sums = m.values.rowwise().sum();
    for (Eigen::Index r = 0; r < sums.size(); ++r) {
        if (sums[r] <= 0.0) {
            throw Error("cell " + std::to_string(r) + " has zero total counts");
        }
    }

    std::vector<double> sorted(sums.data(), sums.data() + sums.size());
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    ExpressionMatrix out = m;
    for (Eigen::Index r = 0; r < out.values.rows(); ++r) {
        out.values.row(r) *= median / sums[r];
    }
    out.values = out.values.array().log1p().matrix();
    return out;
}

StateHistogram binarize(const ExpressionMatrix& m, const GeneSelection& selection) {
    if (selection.genes.empty() || selection.genes.size() > kMaxSelectedGenes) {
        throw Error("gene selection '" + selection.cell_type_label + "' must hold 1.." +
                    std::to_string(kMaxSelectedGenes) + " genes");
    }
    std::vector<std::size_t> columns;
    columns.reserve(selection.genes.size());
    for (const auto& g : selection.genes) {
        columns.push_back(m.gene_index(g));
    }

    StateHistogram h(static_cast<int>(columns.size()));
    for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
        BasisIndex index = 0;
        for (std::size_t k = 0; k < columns.size(); ++k) {
            if (m.values(r, static_cast<Eigen::Index>(columns[k])) > 0.0) {
                index |= BasisIndex{1} << k;
            }
        }
        h.add_index(index);
    }
    return h;
}

namespace {

double l2_norm_of_counts(const StateHistogram& h) {
    double sumsq = 0.0;
    for (const auto c : h.counts()) {
        sumsq += static_cast<double>(c) * static_cast<double>(c);
    }
    if (sumsq == 0.0) {
        throw Error("histogram is empty (all counts are zero)");
    }
    return std::sqrt(sumsq);
}

} // namespace

AmplitudeVector amplitudes(const StateHistogram& h) {
    const double norm = l2_norm_of_counts(h);
    AmplitudeVector a;
    a.num_qubits = h.num_genes();
    a.amplitudes.reserve(h.counts().size());
    for (const auto c : h.counts()) {
        a.amplitudes.push_back(static_cast<double>(c) / norm);
    }
    return a;
}

Distribution target_distribution(const StateHistogram& h) {
    double sumsq = 0.0;
    for (const auto c : h.counts()) {
        sumsq += static_cast<double>(c) * static_cast<double>(c);
    }
    if (sumsq == 0.0) {
        throw Error("histogram is empty (all counts are zero)");
    }
    Distribution q;
    q.num_qubits = h.num_genes();
    q.probabilities.reserve(h.counts().size());
    for (const auto c : h.counts()) {
        const double cd = static_cast<double>(c);
        q.probabilities.push_back(cd * cd / sumsq);
    }
    return q;
}

} // namespace qxct::ingest
