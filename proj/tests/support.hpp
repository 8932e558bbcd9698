#pragma once

// Shared generators and brute-force oracles for the unit and acceptance tests.

#include "qxct/cost.hpp"
#include "qxct/prune.hpp"
#include "qxct/qsim.hpp"
#include "qxct/search.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

namespace qxct::testing {

inline double uniform(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline qsim::StateVector random_state(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> g;
    std::vector<std::complex<double>> a(basis_size(n));
    double norm = 0.0;
    for (auto& x : a) {
        x = {g(rng), g(rng)};
        norm += std::norm(x);
    }
    for (auto& x : a) {
        x /= std::sqrt(norm);
    }
    return qsim::StateVector(n, std::move(a));
}

/// Non-negative real amplitudes from random counts, like an encoded population.
inline qsim::StateVector random_population(int n, std::mt19937_64& rng, double zero_fraction = 0.3) {
    std::vector<std::complex<double>> a(basis_size(n));
    double norm = 0.0;
    for (auto& x : a) {
        x = uniform(rng) < zero_fraction ? 0.0 : std::floor(uniform(rng, 1.0, 20.0));
        norm += std::norm(x);
    }
    if (norm == 0.0) {
        a[0] = 1.0;
        norm = 1.0;
    }
    for (auto& x : a) {
        x /= std::sqrt(norm);
    }
    return qsim::StateVector(n, std::move(a));
}

inline Distribution random_distribution(int n, std::mt19937_64& rng, double zero_fraction = 0.0) {
    Distribution d{n, std::vector<double>(basis_size(n))};
    double sum = 0.0;
    for (auto& p : d.probabilities) {
        p = uniform(rng) < zero_fraction ? 0.0 : uniform(rng, 0.01, 1.0);
        sum += p;
    }
    if (sum == 0.0) {
        d.probabilities[0] = sum = 1.0;
    }
    for (auto& p : d.probabilities) {
        p /= sum;
    }
    return d;
}

inline qsim::GateSpec random_gate(int n, std::mt19937_64& rng) {
    const int kind = static_cast<int>(rng() % 6);
    const int t = static_cast<int>(rng() % static_cast<unsigned>(n));
    int c = static_cast<int>(rng() % static_cast<unsigned>(n - 1));
    if (c >= t) {
        ++c;
    }
    const double theta = uniform(rng, -2.0 * std::numbers::pi, 2.0 * std::numbers::pi);
    switch (kind) {
    case 0:
        return qsim::GateSpec::crx(c, t, theta);
    case 1:
        return qsim::GateSpec::cnot(c, t);
    case 2:
        return qsim::GateSpec::rx(t, theta);
    case 3:
        return qsim::GateSpec::ry(t, theta);
    case 4:
        return qsim::GateSpec::rz(t, theta);
    default:
        return qsim::GateSpec::h(t);
    }
}

inline qsim::Topology random_circuit(int n, std::size_t length, std::mt19937_64& rng) {
    qsim::Topology t;
    for (std::size_t i = 0; i < length; ++i) {
        t.gates.push_back(random_gate(n, rng));
    }
    return t;
}

inline prune::CandidateSet random_candidates(int n, std::size_t count, std::mt19937_64& rng) {
    std::vector<prune::QubitPair> all;
    for (int c = 0; c < n; ++c) {
        for (int t = 0; t < n; ++t) {
            if (c != t) {
                all.push_back({c, t});
            }
        }
    }
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(std::min(count, all.size()));
    return {all, prune::kDefaultThreshold};
}

/**
 * Random 2-register problem: population-like initial registers, targets produced by a
 * random CRX circuit over the candidates (so the optimum is reachable) mixed with noise.
 */
inline cost::Problem random_problem(int ct1, int ct2, const prune::CandidateSet& cands, std::mt19937_64& rng) {
    const qsim::RegisterLayout layout{ct1, ct2};
    const auto init = qsim::tensor(random_population(ct1, rng), random_population(ct2, rng), layout);
    qsim::Topology hidden;
    for (const auto& p : cands.pairs) {
        if (uniform(rng) < 0.6) {
            hidden.gates.push_back(qsim::GateSpec::crx(p.control, p.target, uniform(rng, 0.5, 2.5)));
        }
    }
    const auto out = qsim::run_circuit(init, hidden);
    auto blend = [&](Distribution d) {
        const auto noise = random_distribution(d.num_qubits, rng);
        const double w = uniform(rng, 0.0, 0.3);
        for (std::size_t i = 0; i < d.probabilities.size(); ++i) {
            d.probabilities[i] = (1.0 - w) * d.probabilities[i] + w * noise.probabilities[i];
        }
        return d;
    };
    return {init, layout, blend(qsim::marginal_probabilities(out, layout.ct1())),
            blend(qsim::marginal_probabilities(out, layout.ct2()))};
}

/// Minimum cost over every ordered sequence of distinct candidates of length 0..max_len.
inline double exhaustive_optimum(const cost::Problem& p, const prune::CandidateSet& cands, std::size_t max_len) {
    double best = cost::evaluate(p, {}).total;
    std::vector<std::size_t> seq;
    std::vector<bool> used(cands.size(), false);
    auto rec = [&](auto&& self) -> void {
        if (!seq.empty()) {
            qsim::Topology t;
            for (const auto i : seq) {
                t.gates.push_back(search::to_gate(cands.pairs[i]));
            }
            best = std::min(best, cost::evaluate(p, t).total);
        }
        if (seq.size() == max_len) {
            return;
        }
        for (std::size_t i = 0; i < cands.size(); ++i) {
            if (!used[i]) {
                used[i] = true;
                seq.push_back(i);
                self(self);
                seq.pop_back();
                used[i] = false;
            }
        }
    };
    rec(rec);
    return best;
}

/// Dense unitary of a gate on n qubits, built column by column from the 2x2 block definition.
inline Eigen::MatrixXcd gate_unitary(const qsim::GateSpec& g, int n) {
    using C = std::complex<double>;
    const double c = std::cos(g.angle / 2.0);
    const double s = std::sin(g.angle / 2.0);
    const C i1(0.0, 1.0);
    Eigen::Matrix2cd u;
    switch (g.kind) {
    case qsim::GateKind::CRX:
    case qsim::GateKind::RX:
        u << c, -i1 * s, -i1 * s, c;
        break;
    case qsim::GateKind::RY:
        u << c, -s, s, c;
        break;
    case qsim::GateKind::RZ:
        u << std::exp(-i1 * g.angle / 2.0), 0.0, 0.0, std::exp(i1 * g.angle / 2.0);
        break;
    case qsim::GateKind::H:
        u << 1.0, 1.0, 1.0, -1.0;
        u /= std::sqrt(2.0);
        break;
    case qsim::GateKind::CNOT:
        u << 0.0, 1.0, 1.0, 0.0;
        break;
    }
    const std::size_t dim = basis_size(n);
    Eigen::MatrixXcd full = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (std::size_t col = 0; col < dim; ++col) {
        const bool active = !g.control || ((col >> *g.control) & 1u);
        if (!active) {
            full(static_cast<Eigen::Index>(col), static_cast<Eigen::Index>(col)) = 1.0;
            continue;
        }
        const std::size_t bit = (col >> g.target) & 1u;
        const std::size_t base = col & ~(std::size_t{1} << g.target);
        for (std::size_t out = 0; out < 2; ++out) {
            full(static_cast<Eigen::Index>(base | (out << g.target)), static_cast<Eigen::Index>(col)) =
                u(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(bit));
        }
    }
    return full;
}

inline Eigen::VectorXcd as_vector(const qsim::StateVector& s) {
    const auto a = s.amplitudes();
    Eigen::VectorXcd v(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = a[i];
    }
    return v;
}

} // namespace qxct::testing
