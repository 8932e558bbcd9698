#pragma once

#include "qxct/common.hpp"
#include "qxct/encoding.hpp"
#include "qxct/qubo.hpp"
#include "qxct/search.hpp"
#include "qxct/synth.hpp"
#include "qxct/tune.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

/**
 * @file pipeline.hpp
 *
 * @brief End-to-end run and the individually runnable stages behind it.
 *
 * Every stage reads its inputs from and writes its outputs to the run's output directory:
 *
 *   simulate  mono_ct1.csv mono_ct2.csv co_ct1.csv co_ct2.csv labels.tsv ground_truth.tsv
 *   encode    encoding.json
 *   prune     candidates.tsv
 *   search    topology.tsv search.json search_trace.jsonl
 *   tune      tuned_topology.tsv tune.json
 *   ablate    contributions.tsv network.tsv
 *   run       all of the above plus report.json report.txt timing.json
 */

namespace qxct::pipeline {

enum class Strategy { Local, MultiEpoch, QuboExact, QuboAnnealing, QuboVqe, QuboQaoa };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& name);
const std::vector<std::string>& strategy_names();

/// Invalid configuration; reported as a usage error.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Failure inside a stage, prefixed with the stage name.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause) : Error(stage + ": " + cause), stage_(std::move(stage)) {}

    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

struct InputPaths {
    std::filesystem::path mono_ct1;
    std::filesystem::path mono_ct2;
    std::filesystem::path co_ct1;
    std::filesystem::path co_ct2;
};

struct RunConfig {
    /// Real data. Exactly one of `inputs` and `synthetic` must be set.
    std::optional<InputPaths> inputs;
    /// Benchmark tissue from the simulator.
    bool synthetic = false;
    synth::Ct2Variant ct2_variant = synth::Ct2Variant::FourGene;
    /// Empty gene lists take the benchmark selections in synthetic mode.
    ingest::GeneSelection ct1{"CT1", {}};
    ingest::GeneSelection ct2{"CT2", {}};
    double threshold = prune::kDefaultThreshold;
    Strategy strategy = Strategy::MultiEpoch;
    search::SearchConfig search;
    int top_k = search::kDefaultTopK;
    bool exact = true;
    std::uint64_t nshots = cost::kDefaultShots;
    /// Drives the simulator, shot sampling, epoch shuffling and the QUBO heuristics.
    std::uint64_t seed = 0;
    std::filesystem::path out = "qxct_out";

    /// Throws ConfigError. Runs before any computation. Stages that start from saved
    /// artifacts pass require_source = false.
    void validate(bool require_source = true) const;
    cost::EvalMode eval_mode() const;
    /// Gene selections after applying the synthetic defaults.
    std::pair<ingest::GeneSelection, ingest::GeneSelection> selections() const;
};

struct SimulationSummary {
    double sparsity_interacting = 0.0;
    double sparsity_isolated = 0.0;
    std::size_t cells = 0;
    std::size_t genes = 0;
};

struct RunReport {
    std::optional<SimulationSummary> simulation;
    std::size_t dropped_cells = 0;
    std::size_t candidates = 0;
    double baseline_kl = 0.0;
    search::SearchResult search;
    tune::TuneResult tune;
    tune::ContributionTable contributions;
    std::vector<tune::NetworkEdge> network;
    std::vector<std::string> gene_map;
    double wall_seconds = 0.0;
};

SimulationSummary simulate_stage(const RunConfig& cfg);
Encoding encode_stage(const RunConfig& cfg);
prune::CandidateSet prune_stage(const RunConfig& cfg);
search::SearchResult search_stage(const RunConfig& cfg);
tune::TuneResult tune_stage(const RunConfig& cfg);
std::pair<tune::ContributionTable, std::vector<tune::NetworkEdge>> ablate_stage(const RunConfig& cfg);

/// Validates, then runs every stage in order and writes the reports.
RunReport run_pipeline(const RunConfig& cfg);

/// Machine-readable report without wall time, so identical runs give identical bytes.
void write_report_json(std::ostream& out, const RunReport& r, const RunConfig& cfg);
void write_report_text(std::ostream& out, const RunReport& r, const RunConfig& cfg);

} // namespace qxct::pipeline
