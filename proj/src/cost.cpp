#include "qxct/cost.hpp"
#include "qxct/common.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace qxct::cost {

void Problem::validate() const {
    if (initial_state.num_qubits() != layout.total()) {
        throw Error("initial state has " + std::to_string(initial_state.num_qubits()) + " qubits but the layout has " +
                    std::to_string(layout.total()));
    }
    if (target_ct1.num_qubits != layout.ct1_qubits || target_ct2.num_qubits != layout.ct2_qubits) {
        throw Error("target distribution sizes do not match the register layout");
    }
    if (!(smoothing > 0.0)) {
        throw Error("smoothing must be positive");
    }
    if (const auto* shots = std::get_if<ShotsMode>(&eval_mode); shots && shots->nshots < 1) {
        throw Error("nshots must be at least 1");
    }
}

double kl_divergence(const Distribution& p, const Distribution& q, double smoothing) {
    if (p.probabilities.size() != q.probabilities.size()) {
        throw Error("KL divergence of distributions with lengths " + std::to_string(p.probabilities.size()) +
                    " and " + std::to_string(q.probabilities.size()));
    }
    double qsum = 0.0;
    for (const double v : q.probabilities) {
        qsum += v + smoothing;
    }
    double kl = 0.0;
    for (std::size_t s = 0; s < p.probabilities.size(); ++s) {
        const double ps = p.probabilities[s];
        if (ps > 0.0) {
            const double qs = (q.probabilities[s] + smoothing) / qsum;
            kl += ps * std::log(ps / qs);
        }
    }
    // Rounding can leave a tiny negative value when p == q'.
    return std::max(kl, 0.0);
}

namespace {

Distribution marginalize_counts(const StateHistogram& joint, qsim::QubitRange range) {
    Distribution d;
    d.num_qubits = range.count;
    d.probabilities.assign(basis_size(range.count), 0.0);
    const std::size_t mask = basis_size(range.count) - 1;
    const auto counts = joint.counts();
    const double total = static_cast<double>(joint.total());
    for (std::size_t i = 0; i < counts.size(); ++i) {
        d.probabilities[(i >> range.first) & mask] += static_cast<double>(counts[i]);
    }
    for (auto& v : d.probabilities) {
        v /= total;
    }
    return d;
}

} // namespace

std::pair<Distribution, Distribution> output_marginals(const Problem& problem, const qsim::Topology& t) {
    const qsim::StateVector out = qsim::run_circuit(problem.initial_state, t);
    if (const auto* shots = std::get_if<ShotsMode>(&problem.eval_mode)) {
        // Both registers are read from the same shots, as a joint measurement would.
        const StateHistogram joint =
            qsim::sample_counts(out, {0, out.num_qubits()}, shots->nshots, shots->seed);
        return {marginalize_counts(joint, problem.layout.ct1()), marginalize_counts(joint, problem.layout.ct2())};
    }
    return {qsim::marginal_probabilities(out, problem.layout.ct1()),
            qsim::marginal_probabilities(out, problem.layout.ct2())};
}

CostReport evaluate(const Problem& problem, const qsim::Topology& t) {
    const auto [p1, p2] = output_marginals(problem, t);
    CostReport r;
    r.kl_ct1 = kl_divergence(p1, problem.target_ct1, problem.smoothing);
    r.kl_ct2 = kl_divergence(p2, problem.target_ct2, problem.smoothing);
    r.total = r.kl_ct1 + r.kl_ct2;
    return r;
}

std::vector<CostReport> evaluate_batch(const Problem& problem, std::span<const qsim::Topology> ts, int workers) {
    std::vector<CostReport> out(ts.size());
    const auto nworkers = static_cast<std::size_t>(std::max(1, workers));
    if (nworkers == 1 || ts.size() < 2) {
        for (std::size_t i = 0; i < ts.size(); ++i) {
            out[i] = evaluate(problem, ts[i]);
        }
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < ts.size(); i = next++) {
            try {
                out[i] = evaluate(problem, ts[i]);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    failure = std::current_exception();
                }
            }
        }
    };
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < std::min(nworkers, ts.size()); ++w) {
            pool.emplace_back(work);
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return out;
}

} // namespace qxct::cost
