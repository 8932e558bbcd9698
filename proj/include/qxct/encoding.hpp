#pragma once

#include "qxct/cost.hpp"
#include "qxct/ingest.hpp"

#include <iosfwd>
#include <string>
#include <vector>

/**
 * @file encoding.hpp
 *
 * @brief The four condition-by-cell-type matrices reduced to register histograms, the
 * global mono/co states and the cost problem built from them.
 *
 * CT1 genes occupy qubits [0, N) and CT2 genes [N, N + M), each in selection order.
 */

namespace qxct {

struct ConditionMatrices {
    ingest::ExpressionMatrix mono_ct1;
    ingest::ExpressionMatrix mono_ct2;
    ingest::ExpressionMatrix co_ct1;
    ingest::ExpressionMatrix co_ct2;
};

struct Encoding {
    ingest::GeneSelection ct1;
    ingest::GeneSelection ct2;
    StateHistogram mono_ct1{1};
    StateHistogram mono_ct2{1};
    StateHistogram co_ct1{1};
    StateHistogram co_ct2{1};
    /// Cells with zero total counts, removed before normalization.
    std::size_t dropped_cells = 0;

    qsim::RegisterLayout layout() const;
    /// Gene name of every qubit.
    std::vector<std::string> gene_map() const;
    qsim::StateVector mono_state() const;
    qsim::StateVector co_state() const;
    /// Mono state as input, co marginals as targets.
    cost::Problem problem(cost::EvalMode mode = cost::ExactMode{}) const;
};

/// Drops all-zero cells, log-normalizes and binarizes each matrix on its cell type's genes.
Encoding encode(const ConditionMatrices& m, const ingest::GeneSelection& ct1, const ingest::GeneSelection& ct2);

/// Throws unless both selections are non-empty, at most 8 genes each and at most 12 in total.
void check_selection_sizes(const ingest::GeneSelection& ct1, const ingest::GeneSelection& ct2);

void write_encoding(std::ostream& out, const Encoding& e);
Encoding read_encoding(std::istream& in, const std::string& source_name);

} // namespace qxct
