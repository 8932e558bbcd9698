#include "qxct/qsim.hpp"
#include "qxct/common.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

namespace qxct::qsim {

namespace {

void check_qubit_count(int n) {
    if (n < 1 || n > kMaxQubits) {
        throw Error("qubit count must be in [1, " + std::to_string(kMaxQubits) + "], got " + std::to_string(n));
    }
}

struct Matrix2 {
    Amplitude m00, m01, m10, m11;
};

Matrix2 single_qubit_matrix(const GateSpec& g) {
    using namespace std::complex_literals;
    const double c = std::cos(g.angle / 2.0);
    const double s = std::sin(g.angle / 2.0);
    switch (g.kind) {
    case GateKind::CRX:
    case GateKind::RX:
        return {c, -1i * s, -1i * s, c};
    case GateKind::RY:
        return {c, -s, s, c};
    case GateKind::RZ:
        return {std::polar(1.0, -g.angle / 2.0), 0.0, 0.0, std::polar(1.0, g.angle / 2.0)};
    case GateKind::H: {
        const double r = 1.0 / std::numbers::sqrt2;
        return {r, r, r, -r};
    }
    case GateKind::CNOT:
        return {0.0, 1.0, 1.0, 0.0};
    }
    throw Error("unknown gate kind");
}

} // namespace

StateVector StateVector::basis(int num_qubits, BasisIndex index) {
    check_qubit_count(num_qubits);
    std::vector<Amplitude> amps(basis_size(num_qubits));
    amps.at(index) = 1.0;
    return StateVector(num_qubits, std::move(amps));
}

StateVector::StateVector(int num_qubits, std::vector<Amplitude> amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
    check_qubit_count(num_qubits);
    if (amplitudes_.size() != basis_size(num_qubits)) {
        throw Error("state of " + std::to_string(num_qubits) + " qubits needs " +
                    std::to_string(basis_size(num_qubits)) + " amplitudes, got " + std::to_string(amplitudes_.size()));
    }
    if (std::abs(norm() - 1.0) > 1e-9) {
        throw Error("state vector is not normalized (norm " + std::to_string(norm()) + ")");
    }
}

double StateVector::norm() const noexcept {
    double sum = 0.0;
    for (const auto& a : amplitudes_) {
        sum += std::norm(a);
    }
    return std::sqrt(sum);
}

std::string to_string(GateKind kind) {
    switch (kind) {
    case GateKind::CRX: return "CRX";
    case GateKind::CNOT: return "CNOT";
    case GateKind::RX: return "RX";
    case GateKind::RY: return "RY";
    case GateKind::RZ: return "RZ";
    case GateKind::H: return "H";
    }
    return "?";
}

GateKind gate_kind_from_string(const std::string& name) {
    for (const auto kind : {GateKind::CRX, GateKind::CNOT, GateKind::RX, GateKind::RY, GateKind::RZ, GateKind::H}) {
        if (to_string(kind) == name) {
            return kind;
        }
    }
    throw Error("unknown gate kind '" + name + "'");
}

bool GateSpec::is_rotation() const noexcept {
    return kind == GateKind::CRX || kind == GateKind::RX || kind == GateKind::RY || kind == GateKind::RZ;
}

Register RegisterLayout::register_of(int qubit) const {
    if (qubit < 0 || qubit >= total()) {
        throw Error("qubit " + std::to_string(qubit) + " is outside the " + std::to_string(total()) + "-qubit layout");
    }
    return qubit < ct1_qubits ? Register::Ct1 : Register::Ct2;
}

StateVector from_amplitudes(const AmplitudeVector& a) {
    if (a.amplitudes.size() != basis_size(a.num_qubits)) {
        throw Error("amplitude vector length does not match its qubit count");
    }
    std::vector<Amplitude> amps(a.amplitudes.begin(), a.amplitudes.end());
    return StateVector(a.num_qubits, std::move(amps));
}

StateVector tensor(const StateVector& ct1, const StateVector& ct2, const RegisterLayout& layout) {
    if (ct1.num_qubits() != layout.ct1_qubits || ct2.num_qubits() != layout.ct2_qubits) {
        throw Error("register layout does not match the factor states");
    }
    if (layout.total() > kMaxQubits) {
        throw Error("combined register of " + std::to_string(layout.total()) + " qubits exceeds the " +
                    std::to_string(kMaxQubits) + "-qubit cap");
    }
    const auto a = ct1.amplitudes();
    const auto b = ct2.amplitudes();
    std::vector<Amplitude> out(a.size() * b.size());
    for (std::size_t hi = 0; hi < b.size(); ++hi) {
        for (std::size_t lo = 0; lo < a.size(); ++lo) {
            out[(hi << layout.ct1_qubits) | lo] = a[lo] * b[hi];
        }
    }
    // Re-normalize away the rounding of the products.
    double sum = 0.0;
    for (const auto& x : out) {
        sum += std::norm(x);
    }
    const double scale = 1.0 / std::sqrt(sum);
    for (auto& x : out) {
        x *= scale;
    }
    return StateVector(layout.total(), std::move(out));
}

void validate_gate(const GateSpec& g, int num_qubits) {
    if (g.target < 0 || g.target >= num_qubits) {
        throw Error("gate target qubit " + std::to_string(g.target) + " out of range for " +
                    std::to_string(num_qubits) + " qubits");
    }
    if (g.is_controlled()) {
        if (!g.control) {
            throw Error(to_string(g.kind) + " gate needs a control qubit");
        }
        if (*g.control < 0 || *g.control >= num_qubits) {
            throw Error("gate control qubit " + std::to_string(*g.control) + " out of range for " +
                        std::to_string(num_qubits) + " qubits");
        }
        if (*g.control == g.target) {
            throw Error("gate control and target are both qubit " + std::to_string(g.target));
        }
    } else if (g.control) {
        throw Error(to_string(g.kind) + " gate does not take a control qubit");
    }
}

void apply_gate_in_place(StateVector& s, const GateSpec& g) {
    validate_gate(g, s.num_qubits());
    const Matrix2 m = single_qubit_matrix(g);
    const std::size_t tbit = std::size_t{1} << g.target;
    const std::size_t cbit = g.control ? std::size_t{1} << *g.control : 0;
    auto amps = s.data();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        if ((i & tbit) || (i & cbit) != cbit) {
            continue;
        }
        const Amplitude a0 = amps[i];
        const Amplitude a1 = amps[i | tbit];
        amps[i] = m.m00 * a0 + m.m01 * a1;
        amps[i | tbit] = m.m10 * a0 + m.m11 * a1;
    }
}

StateVector apply_gate(StateVector s, const GateSpec& g) {
    apply_gate_in_place(s, g);
    return s;
}

StateVector run_circuit(StateVector init, const Topology& t) {
    for (const auto& g : t.gates) {
        validate_gate(g, init.num_qubits());
    }
    for (const auto& g : t.gates) {
        apply_gate_in_place(init, g);
    }
    return init;
}

void apply_diagonal_phase(StateVector& s, std::span<const double> diagonal, double scale) {
    auto amps = s.data();
    if (diagonal.size() != amps.size()) {
        throw Error("diagonal length does not match the state dimension");
    }
    for (std::size_t k = 0; k < amps.size(); ++k) {
        amps[k] *= std::polar(1.0, -scale * diagonal[k]);
    }
}

Distribution marginal_probabilities(const StateVector& s, QubitRange range) {
    if (range.count < 1) {
        throw Error("marginal over an empty qubit range");
    }
    if (range.first < 0 || range.first + range.count > s.num_qubits()) {
        throw Error("qubit range exceeds the state's " + std::to_string(s.num_qubits()) + " qubits");
    }
    Distribution d;
    d.num_qubits = range.count;
    d.probabilities.assign(basis_size(range.count), 0.0);
    const std::size_t mask = basis_size(range.count) - 1;
    const auto amps = s.amplitudes();
    for (std::size_t i = 0; i < amps.size(); ++i) {
        d.probabilities[(i >> range.first) & mask] += std::norm(amps[i]);
    }
    return d;
}

StateHistogram sample_counts(const StateVector& s, QubitRange range, std::uint64_t nshots, std::uint64_t seed) {
    if (nshots < 1) {
        throw Error("nshots must be at least 1");
    }
    const Distribution d = marginal_probabilities(s, range);
    std::vector<double> cdf(d.probabilities.size());
    std::partial_sum(d.probabilities.begin(), d.probabilities.end(), cdf.begin());
    const double total = cdf.back();

    // Uniform draws from the top 53 bits keep the stream identical across standard libraries.
    std::mt19937_64 rng(seed);
    StateHistogram h(range.count);
    for (std::uint64_t shot = 0; shot < nshots; ++shot) {
        const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        auto index = static_cast<std::size_t>(std::min(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size() - 1)));
        // u can only land past the end through rounding; walk back to a bin that has mass.
        while (d.probabilities[index] == 0.0 && index > 0) {
            --index;
        }
        h.add_index(static_cast<BasisIndex>(index));
    }
    return h;
}

ComplexMatrix density_matrix(const StateVector& s) {
    if (s.num_qubits() > kMaxDensityQubits) {
        throw Error("density matrix limited to " + std::to_string(kMaxDensityQubits) + " qubits");
    }
    const auto amps = s.amplitudes();
    const Eigen::Map<const Eigen::VectorXcd> psi(amps.data(), static_cast<Eigen::Index>(amps.size()));
    return psi * psi.adjoint();
}

} // namespace qxct::qsim
