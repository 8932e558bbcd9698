#include "qxct/basis.hpp"
#include "qxct/common.hpp"

#include <numeric>

namespace qxct {

BasisIndex bitstring_to_index(std::string_view bits) {
    if (bits.empty() || bits.size() > static_cast<std::size_t>(kMaxQubits)) {
        throw Error("bitstring length must be in [1, " + std::to_string(kMaxQubits) + "]");
    }
    BasisIndex index = 0;
    for (std::size_t k = 0; k < bits.size(); ++k) {
        if (bits[k] == '1') {
            index |= BasisIndex{1} << k;
        } else if (bits[k] != '0') {
            throw Error("bitstring '" + std::string(bits) + "' contains a character other than 0/1");
        }
    }
    return index;
}

std::string index_to_bitstring(BasisIndex index, int num_bits) {
    std::string out(static_cast<std::size_t>(num_bits), '0');
    for (int k = 0; k < num_bits; ++k) {
        if ((index >> k) & 1u) {
            out[static_cast<std::size_t>(k)] = '1';
        }
    }
    return out;
}

StateHistogram::StateHistogram(int num_genes) : num_genes_(num_genes) {
    if (num_genes < 1 || num_genes > kMaxQubits) {
        throw Error("histogram width must be in [1, " + std::to_string(kMaxQubits) + "], got " + std::to_string(num_genes));
    }
    counts_.assign(basis_size(num_genes), 0);
}

void StateHistogram::add(std::string_view bits, std::uint64_t n) {
    if (bits.size() != static_cast<std::size_t>(num_genes_)) {
        throw Error("bitstring '" + std::string(bits) + "' does not have length " + std::to_string(num_genes_));
    }
    counts_[bitstring_to_index(bits)] += n;
}

void StateHistogram::add_index(BasisIndex index, std::uint64_t n) {
    counts_.at(index) += n;
}

std::uint64_t StateHistogram::count(std::string_view bits) const {
    if (bits.size() != static_cast<std::size_t>(num_genes_)) {
        throw Error("bitstring '" + std::string(bits) + "' does not have length " + std::to_string(num_genes_));
    }
    return counts_[bitstring_to_index(bits)];
}

std::uint64_t StateHistogram::total() const noexcept {
    return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

std::map<std::string, std::uint64_t> StateHistogram::nonzero() const {
    std::map<std::string, std::uint64_t> out;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] != 0) {
            out.emplace(index_to_bitstring(static_cast<BasisIndex>(i), num_genes_), counts_[i]);
        }
    }
    return out;
}

double Distribution::sum() const noexcept {
    return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

} // namespace qxct
