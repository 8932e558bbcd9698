#pragma once

#include "qxct/basis.hpp"

#include <Eigen/Dense>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file ingest.hpp
 *
 * @brief Expression-matrix loading, log-normalization, binarization and state encoding.
 */

namespace qxct::ingest {

/// Dense cells-by-genes expression matrix.
struct ExpressionMatrix {
    Eigen::MatrixXd values;
    std::vector<std::string> gene_names;

    std::size_t cell_count() const noexcept { return static_cast<std::size_t>(values.rows()); }
    std::size_t gene_count() const noexcept { return gene_names.size(); }

    /// Column of a gene, or throws if the gene is unknown.
    std::size_t gene_index(std::string_view gene) const;

    /// Checks non-negativity, unique gene names and shape agreement.
    void validate() const;
};

/**
 * Genes that define one cell type's register.
 * The first gene maps to the lowest qubit of that register.
 */
struct GeneSelection {
    std::string cell_type_label;
    std::vector<std::string> genes;
};

inline constexpr std::size_t kMaxSelectedGenes = 8;

/// Delimited-text layout. A zero delimiter means: tab if the header has one, else comma.
struct DelimitedFormat {
    char delimiter = 0;
};

ExpressionMatrix load_matrix(const std::filesystem::path& path, DelimitedFormat format = {});
ExpressionMatrix parse_matrix(std::istream& in, DelimitedFormat format, const std::string& source_name);

void write_matrix(std::ostream& out, const ExpressionMatrix& m, char delimiter = ',');
void save_matrix(const std::filesystem::path& path, const ExpressionMatrix& m, char delimiter = ',');

/**
 * Scale every cell to the median library size, then apply log(1 + x).
 * Throws if a cell has zero total counts.
 */
ExpressionMatrix log_normalize(const ExpressionMatrix& m);

/// Per-cell activity pattern (expression strictly greater than zero), accumulated over cells.
StateHistogram binarize(const ExpressionMatrix& m, const GeneSelection& selection);

/// alpha_s = C(s) / sqrt(sum C(s')^2).
AmplitudeVector amplitudes(const StateHistogram& h);

/// Q(s) = alpha_s^2 = C(s)^2 / sum C(s')^2, the squared-L2 weighting rather than plain frequencies.
Distribution target_distribution(const StateHistogram& h);

} // namespace qxct::ingest
