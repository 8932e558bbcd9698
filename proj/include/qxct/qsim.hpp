#pragma once

#include "qxct/basis.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

/**
 * @file qsim.hpp
 *
 * @brief Dense statevector simulation for registers of up to 12 qubits.
 *
 * Basis indices are little-endian: qubit k is bit k (see basis.hpp).
 * Global phase is kept as-is; only measurement probabilities are contract-bearing.
 */

namespace qxct::qsim {

using Amplitude = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

/// Density matrices are capped at 10 qubits (2^20 entries).
inline constexpr int kMaxDensityQubits = 10;

class StateVector {
public:
    /// Computational basis state |index> on n qubits.
    static StateVector basis(int num_qubits, BasisIndex index = 0);

    /// Takes ownership of the amplitudes; throws if the norm deviates from 1 by more than 1e-9.
    StateVector(int num_qubits, std::vector<Amplitude> amplitudes);

    int num_qubits() const noexcept { return num_qubits_; }
    std::size_t dimension() const noexcept { return amplitudes_.size(); }
    std::span<const Amplitude> amplitudes() const noexcept { return amplitudes_; }
    Amplitude operator[](BasisIndex index) const { return amplitudes_.at(index); }
    double norm() const noexcept;

    /// Raw mutable access for the gate kernels. Callers own the normalization invariant.
    std::span<Amplitude> data() noexcept { return amplitudes_; }

private:
    int num_qubits_;
    std::vector<Amplitude> amplitudes_;
};

enum class GateKind { CRX, CNOT, RX, RY, RZ, H };

std::string to_string(GateKind kind);
GateKind gate_kind_from_string(const std::string& name);

struct GateSpec {
    GateKind kind = GateKind::CRX;
    std::optional<int> control;
    int target = 0;
    double angle = 0.0;

    static GateSpec crx(int control, int target, double angle) { return {GateKind::CRX, control, target, angle}; }
    static GateSpec cnot(int control, int target) { return {GateKind::CNOT, control, target, 0.0}; }
    static GateSpec rx(int target, double angle) { return {GateKind::RX, std::nullopt, target, angle}; }
    static GateSpec ry(int target, double angle) { return {GateKind::RY, std::nullopt, target, angle}; }
    static GateSpec rz(int target, double angle) { return {GateKind::RZ, std::nullopt, target, angle}; }
    static GateSpec h(int target) { return {GateKind::H, std::nullopt, target, 0.0}; }

    bool is_rotation() const noexcept;
    bool is_controlled() const noexcept { return kind == GateKind::CRX || kind == GateKind::CNOT; }

    bool operator==(const GateSpec&) const = default;
};

/// Ordered gate sequence, applied first-to-last.
struct Topology {
    std::vector<GateSpec> gates;

    std::size_t size() const noexcept { return gates.size(); }
    bool empty() const noexcept { return gates.empty(); }

    bool operator==(const Topology&) const = default;
};

/// Contiguous block of qubits [first, first + count).
struct QubitRange {
    int first = 0;
    int count = 0;
};

enum class Register { Ct1, Ct2 };

/// CT1 occupies qubits [0, N), CT2 occupies [N, N + M).
struct RegisterLayout {
    int ct1_qubits = 0;
    int ct2_qubits = 0;

    int total() const noexcept { return ct1_qubits + ct2_qubits; }
    QubitRange ct1() const noexcept { return {0, ct1_qubits}; }
    QubitRange ct2() const noexcept { return {ct1_qubits, ct2_qubits}; }
    Register register_of(int qubit) const;

    bool operator==(const RegisterLayout&) const = default;
};

StateVector from_amplitudes(const AmplitudeVector& a);

/// Global state with CT1 bits in [0, N) and CT2 bits in [N, N + M).
StateVector tensor(const StateVector& ct1, const StateVector& ct2, const RegisterLayout& layout);

/// Throws if the gate's indices are invalid for an n-qubit register.
void validate_gate(const GateSpec& g, int num_qubits);

void apply_gate_in_place(StateVector& s, const GateSpec& g);
StateVector apply_gate(StateVector s, const GateSpec& g);
StateVector run_circuit(StateVector init, const Topology& t);

/// Multiplies amplitude k by exp(-i * scale * diagonal[k]), i.e. evolves under a diagonal Hamiltonian.
void apply_diagonal_phase(StateVector& s, std::span<const double> diagonal, double scale);

/// Probability of each bit pattern of the qubits in `range`, summed over all other qubits.
Distribution marginal_probabilities(const StateVector& s, QubitRange range);

/// nshots independent measurements of the qubits in `range`, deterministic in `seed`.
StateHistogram sample_counts(const StateVector& s, QubitRange range, std::uint64_t nshots, std::uint64_t seed);

ComplexMatrix density_matrix(const StateVector& s);

} // namespace qxct::qsim
