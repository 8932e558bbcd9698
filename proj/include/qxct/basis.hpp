#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file basis.hpp
 *
 * @brief Computational-basis conventions shared by the encoder and the simulator.
 *
 * Qubit k maps to bit k of a basis index (qubit 0 is the least-significant bit).
 * Gene-activity bitstrings are written gene-order first-to-last, so character k
 * of a bitstring is the value of qubit k: "01" is index 2.
 */

namespace qxct {

/// Hard cap on register size for dense simulation.
inline constexpr int kMaxQubits = 12;

using BasisIndex = std::uint32_t;

/// Number of basis states of an n-qubit register.
constexpr std::size_t basis_size(int num_qubits) { return std::size_t{1} << num_qubits; }

BasisIndex bitstring_to_index(std::string_view bits);
std::string index_to_bitstring(BasisIndex index, int num_bits);

/**
 * Counts of cells (or measurement shots) per gene-activity pattern.
 * Stored densely by basis index; bitstring accessors follow the convention above.
 */
class StateHistogram {
public:
    explicit StateHistogram(int num_genes);

    int num_genes() const noexcept { return num_genes_; }

    void add(std::string_view bits, std::uint64_t n = 1);
    void add_index(BasisIndex index, std::uint64_t n = 1);

    std::uint64_t count(std::string_view bits) const;
    std::uint64_t count_at(BasisIndex index) const { return counts_.at(index); }
    std::uint64_t total() const noexcept;

    std::span<const std::uint64_t> counts() const noexcept { return counts_; }

    /// Non-zero entries keyed by bitstring, for reports and serialization.
    std::map<std::string, std::uint64_t> nonzero() const;

    bool operator==(const StateHistogram&) const = default;

private:
    int num_genes_;
    std::vector<std::uint64_t> counts_;
};

/// L2-normalized non-negative amplitudes over 2^d basis states.
struct AmplitudeVector {
    int num_qubits = 0;
    std::vector<double> amplitudes;
};

/// Probability distribution over the basis states of a register.
struct Distribution {
    int num_qubits = 0;
    std::vector<double> probabilities;

    double sum() const noexcept;
};

} // namespace qxct
