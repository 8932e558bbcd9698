#pragma once

#include "qxct/prune.hpp"
#include "qxct/qsim.hpp"

#include <iosfwd>
#include <string>
#include <vector>

/**
 * @file artifacts.hpp
 *
 * @brief Tab-separated text forms of candidate sets and gate sequences.
 *
 * Angles are written with round-trip precision so a saved topology reloads bit-for-bit.
 */

namespace qxct::artifacts {

/// Columns: control_gene, target_gene, control_qubit, target_qubit. The threshold goes in a leading comment.
void write_candidates(std::ostream& out, const prune::CandidateSet& c, const std::vector<std::string>& gene_map);
prune::CandidateSet read_candidates(std::istream& in, const std::string& source_name);

/// Columns: step, gate, control_qubit, target_qubit, angle, control_gene, target_gene ("-" when absent).
void write_topology(std::ostream& out, const qsim::Topology& t, const std::vector<std::string>& gene_map);
qsim::Topology read_topology(std::istream& in, const std::string& source_name);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

} // namespace qxct::artifacts
