#include "qxct/pipeline.hpp"
#include "qxct/artifacts.hpp"

#include "json.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace qxct::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct StrategyName {
    Strategy strategy;
    const char* name;
};

constexpr StrategyName kStrategies[] = {
    {Strategy::Local, "local"},
    {Strategy::MultiEpoch, "multi-epoch"},
    {Strategy::QuboExact, "qubo-exact"},
    {Strategy::QuboAnnealing, "qubo-annealing"},
    {Strategy::QuboVqe, "qubo-vqe"},
    {Strategy::QuboQaoa, "qubo-qaoa"},
};

constexpr const char* kMatrixFiles[] = {"mono_ct1.csv", "mono_ct2.csv", "co_ct1.csv", "co_ct2.csv"};

std::ifstream open_artifact(const RunConfig& cfg, const std::string& stage, const std::string& name,
                            const std::string& producer) {
    const fs::path p = cfg.out / name;
    std::ifstream in(p);
    if (!in) {
        throw StageError(stage, "missing prerequisite artifact '" + p.string() + "' (produced by `" + producer + "`)");
    }
    return in;
}

std::ofstream create_artifact(const RunConfig& cfg, const std::string& stage, const std::string& name) {
    std::error_code ec;
    fs::create_directories(cfg.out, ec);
    const fs::path p = cfg.out / name;
    std::ofstream out(p);
    if (!out) {
        throw StageError(stage, "cannot write '" + p.string() + "'");
    }
    return out;
}

template <typename F>
auto in_stage(const std::string& stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(stage, e.what());
    }
}

Encoding load_encoding(const RunConfig& cfg, const std::string& stage) {
    auto in = open_artifact(cfg, stage, "encoding.json", "encode");
    return read_encoding(in, (cfg.out / "encoding.json").string());
}

json cost_json(const cost::CostReport& c) { return {{"total", c.total}, {"kl_ct1", c.kl_ct1}, {"kl_ct2", c.kl_ct2}}; }

json topology_json(const qsim::Topology& t, const std::vector<std::string>& genes, bool wrap) {
    json arr = json::array();
    for (const auto& g : t.gates) {
        const int c = g.control.value_or(g.target);
        arr.push_back({{"gate", qsim::to_string(g.kind)},
                       {"control", c},
                       {"target", g.target},
                       {"angle", wrap ? tune::wrap_angle(g.angle) : g.angle},
                       {"control_gene", genes.at(static_cast<std::size_t>(c))},
                       {"target_gene", genes.at(static_cast<std::size_t>(g.target))}});
    }
    return arr;
}

json config_json(const RunConfig& cfg) {
    const auto [ct1, ct2] = cfg.selections();
    json j;
    j["synthetic"] = cfg.synthetic;
    if (cfg.inputs) {
        j["inputs"] = {{"mono_ct1", cfg.inputs->mono_ct1.string()},
                       {"mono_ct2", cfg.inputs->mono_ct2.string()},
                       {"co_ct1", cfg.inputs->co_ct1.string()},
                       {"co_ct2", cfg.inputs->co_ct2.string()}};
    }
    j["ct2_variant"] = cfg.ct2_variant == synth::Ct2Variant::FiveGene ? 5 : 4;
    j["ct1_genes"] = ct1.genes;
    j["ct2_genes"] = ct2.genes;
    j["threshold"] = cfg.threshold;
    j["strategy"] = to_string(cfg.strategy);
    j["kl_tol"] = cfg.search.kl_tol;
    j["eps_prune"] = cfg.search.eps_prune;
    j["n_choose"] = cfg.search.n_choose;
    j["n_epochs"] = cfg.search.n_epochs ? json(*cfg.search.n_epochs) : json(nullptr);
    j["max_depth"] = cfg.search.max_depth;
    j["top_k"] = cfg.top_k;
    j["exact"] = cfg.exact;
    j["nshots"] = cfg.nshots;
    j["seed"] = cfg.seed;
    j["workers"] = cfg.search.workers;
    return j;
}

search::SearchConfig effective_search(const RunConfig& cfg) {
    search::SearchConfig s = cfg.search;
    s.shuffle_seed = cfg.seed;
    return s;
}

} // namespace

std::string to_string(Strategy s) {
    for (const auto& e : kStrategies) {
        if (e.strategy == s) {
            return e.name;
        }
    }
    return "unknown";
}

Strategy strategy_from_string(const std::string& name) {
    for (const auto& e : kStrategies) {
        if (name == e.name) {
            return e.strategy;
        }
    }
    throw ConfigError("unknown strategy '" + name + "'");
}

const std::vector<std::string>& strategy_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : kStrategies) {
            v.emplace_back(e.name);
        }
        return v;
    }();
    return names;
}

std::pair<ingest::GeneSelection, ingest::GeneSelection> RunConfig::selections() const {
    auto a = ct1;
    auto b = ct2;
    if (synthetic) {
        const auto preset = synth::benchmark_preset(ct2_variant, seed);
        if (a.genes.empty()) {
            a.genes = preset.ct1.genes;
        }
        if (b.genes.empty()) {
            b.genes = preset.ct2.genes;
        }
    }
    return {a, b};
}

void RunConfig::validate(bool require_source) const {
    if (synthetic && inputs) {
        throw ConfigError("the synthetic preset and input matrices are mutually exclusive");
    }
    if (require_source && !synthetic && !inputs) {
        throw ConfigError("exactly one of the synthetic preset and the four input matrices must be given");
    }
    try {
        if (synthetic || inputs) {
            const auto [a, b] = selections();
            check_selection_sizes(a, b);
        }
        search.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError(e.what());
    }
    if (!(threshold > 0.0)) {
        throw ConfigError("threshold must be positive");
    }
    if (top_k < 1) {
        throw ConfigError("top_k must be at least 1");
    }
    if (!exact && nshots == 0) {
        throw ConfigError("nshots must be positive in shots mode");
    }
    if (out.empty()) {
        throw ConfigError("output directory must not be empty");
    }
}

cost::EvalMode RunConfig::eval_mode() const {
    if (exact) {
        return cost::ExactMode{};
    }
    return cost::ShotsMode{nshots, seed};
}

SimulationSummary simulate_stage(const RunConfig& cfg) {
    return in_stage("simulate", [&] {
        const auto preset = synth::benchmark_preset(cfg.ct2_variant, cfg.seed);
        const auto d = synth::generate_paired(preset.config);
        const ingest::ExpressionMatrix* mats[] = {&d.mono_ct1, &d.mono_ct2, &d.co_ct1, &d.co_ct2};
        for (std::size_t i = 0; i < 4; ++i) {
            auto out = create_artifact(cfg, "simulate", kMatrixFiles[i]);
            ingest::write_matrix(out, *mats[i], ',');
        }
        {
            auto out = create_artifact(cfg, "simulate", "labels.tsv");
            synth::write_labels(out, d.interacting);
        }
        {
            auto out = create_artifact(cfg, "simulate", "ground_truth.tsv");
            synth::write_ground_truth(out, preset.ground_truth);
        }
        SimulationSummary s;
        s.sparsity_interacting = synth::sparsity(d.interacting.observed);
        s.sparsity_isolated = synth::sparsity(d.isolated.observed);
        s.cells = static_cast<std::size_t>(d.interacting.observed.rows());
        s.genes = preset.config.gene_count();
        return s;
    });
}

Encoding encode_stage(const RunConfig& cfg) {
    return in_stage("encode", [&] {
        ConditionMatrices m;
        ingest::ExpressionMatrix* mats[] = {&m.mono_ct1, &m.mono_ct2, &m.co_ct1, &m.co_ct2};
        for (std::size_t i = 0; i < 4; ++i) {
            fs::path p;
            if (cfg.inputs) {
                const fs::path* given[] = {&cfg.inputs->mono_ct1, &cfg.inputs->mono_ct2, &cfg.inputs->co_ct1,
                                           &cfg.inputs->co_ct2};
                p = *given[i];
            } else {
                p = cfg.out / kMatrixFiles[i];
            }
            if (!fs::exists(p)) {
                throw StageError("encode", "missing prerequisite artifact '" + p.string() + "'" +
                                               (cfg.inputs ? "" : " (produced by `simulate`)"));
            }
            *mats[i] = ingest::load_matrix(p);
        }
        const auto [ct1, ct2] = cfg.selections();
        const Encoding e = encode(m, ct1, ct2);
        auto out = create_artifact(cfg, "encode", "encoding.json");
        write_encoding(out, e);
        return e;
    });
}

prune::CandidateSet prune_stage(const RunConfig& cfg) {
    return in_stage("prune", [&] {
        const Encoding e = load_encoding(cfg, "prune");
        const auto c = prune::extract_candidates(prune::delta_rho(e.mono_state(), e.co_state()), e.layout(),
                                                 cfg.threshold);
        auto out = create_artifact(cfg, "prune", "candidates.tsv");
        artifacts::write_candidates(out, c, e.gene_map());
        return c;
    });
}

search::SearchResult search_stage(const RunConfig& cfg) {
    return in_stage("search", [&] {
        const Encoding e = load_encoding(cfg, "search");
        auto cin = open_artifact(cfg, "search", "candidates.tsv", "prune");
        const auto cands = artifacts::read_candidates(cin, (cfg.out / "candidates.tsv").string());
        const cost::Problem problem = e.problem(cfg.eval_mode());
        const auto scfg = effective_search(cfg);

        search::SearchResult r;
        switch (cfg.strategy) {
        case Strategy::Local:
            r = search::local_search(problem, cands, scfg);
            break;
        case Strategy::MultiEpoch:
            r = search::multi_epoch(problem, cands, scfg);
            break;
        case Strategy::QuboExact:
            r = search::qubo_search(problem, cands, scfg, search::QuboSolver::Exact, cfg.top_k, cfg.seed);
            break;
        case Strategy::QuboAnnealing:
            r = search::qubo_search(problem, cands, scfg, search::QuboSolver::Annealing, cfg.top_k, cfg.seed);
            break;
        case Strategy::QuboVqe:
            r = search::qubo_search(problem, cands, scfg, search::QuboSolver::Vqe, cfg.top_k, cfg.seed);
            break;
        case Strategy::QuboQaoa:
            r = search::qubo_search(problem, cands, scfg, search::QuboSolver::Qaoa, cfg.top_k, cfg.seed);
            break;
        }

        const auto genes = e.gene_map();
        {
            auto out = create_artifact(cfg, "search", "topology.tsv");
            artifacts::write_topology(out, r.topology, genes);
        }
        {
            auto out = create_artifact(cfg, "search", "search_trace.jsonl");
            search::write_trace(out, r.history);
        }
        {
            json j;
            j["strategy"] = to_string(cfg.strategy);
            j["candidates"] = cands.size();
            j["baseline"] = cost::evaluate(problem, {}).total;
            j["cost"] = cost_json(r.cost);
            j["evaluations"] = r.evaluations;
            j["topology"] = topology_json(r.topology, genes, false);
            if (r.qubo) {
                json selected = json::array();
                for (std::size_t i = 0; i < cands.size(); ++i) {
                    if ((r.qubo->assignment >> i) & 1u) {
                        selected.push_back(i);
                    }
                }
                j["qubo"] = {{"energy", r.qubo->energy}, {"selected", selected}};
            }
            auto out = create_artifact(cfg, "search", "search.json");
            out << j.dump(2) << '\n';
        }
        return r;
    });
}

tune::TuneResult tune_stage(const RunConfig& cfg) {
    return in_stage("tune", [&] {
        const Encoding e = load_encoding(cfg, "tune");
        auto tin = open_artifact(cfg, "tune", "topology.tsv", "search");
        const auto topology = artifacts::read_topology(tin, (cfg.out / "topology.tsv").string());
        const cost::Problem problem = e.problem(cfg.eval_mode());
        const auto r = tune::optimize_angles(problem, topology);

        const auto genes = e.gene_map();
        {
            auto out = create_artifact(cfg, "tune", "tuned_topology.tsv");
            artifacts::write_topology(out, tune::with_angles(topology, r.angles), genes);
        }
        {
            json j;
            j["initial_cost"] = cost_json(r.initial_cost);
            j["cost"] = cost_json(r.cost);
            j["evaluations"] = r.evaluations;
            j["angles"] = r.angles.values;
            j["angles_wrapped"] = r.angles.wrapped();
            auto out = create_artifact(cfg, "tune", "tune.json");
            out << j.dump(2) << '\n';
        }
        return r;
    });
}

std::pair<tune::ContributionTable, std::vector<tune::NetworkEdge>> ablate_stage(const RunConfig& cfg) {
    return in_stage("ablate", [&] {
        const Encoding e = load_encoding(cfg, "ablate");
        auto tin = open_artifact(cfg, "ablate", "tuned_topology.tsv", "tune");
        const auto tuned = artifacts::read_topology(tin, (cfg.out / "tuned_topology.tsv").string());
        tune::AngleVector angles;
        for (const auto& g : tuned.gates) {
            angles.values.push_back(g.angle);
        }
        const cost::Problem problem = e.problem(cfg.eval_mode());
        const auto genes = e.gene_map();
        auto table = tune::contribution_analysis(problem, tuned, angles, genes);
        auto edges = tune::export_network(tuned, angles, genes, e.layout());
        {
            auto out = create_artifact(cfg, "ablate", "contributions.tsv");
            tune::write_contributions(out, table);
        }
        {
            auto out = create_artifact(cfg, "ablate", "network.tsv");
            tune::write_network(out, edges);
        }
        return std::pair{std::move(table), std::move(edges)};
    });
}

RunReport run_pipeline(const RunConfig& cfg) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    RunReport r;
    if (cfg.synthetic) {
        r.simulation = simulate_stage(cfg);
    }
    const Encoding e = encode_stage(cfg);
    r.dropped_cells = e.dropped_cells;
    r.gene_map = e.gene_map();
    r.candidates = prune_stage(cfg).size();
    r.search = search_stage(cfg);
    r.tune = tune_stage(cfg);
    std::tie(r.contributions, r.network) = ablate_stage(cfg);
    r.baseline_kl = r.contributions.baseline_kl;
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    in_stage("report", [&] {
        {
            auto out = create_artifact(cfg, "report", "report.json");
            write_report_json(out, r, cfg);
        }
        {
            auto out = create_artifact(cfg, "report", "report.txt");
            write_report_text(out, r, cfg);
        }
        {
            auto out = create_artifact(cfg, "report", "timing.json");
            out << json{{"wall_seconds", r.wall_seconds}}.dump(2) << '\n';
        }
        return 0;
    });
    return r;
}

void write_report_json(std::ostream& out, const RunReport& r, const RunConfig& cfg) {
    json j;
    j["config"] = config_json(cfg);
    if (r.simulation) {
        j["simulation"] = {{"cells", r.simulation->cells},
                           {"genes", r.simulation->genes},
                           {"sparsity_interacting", r.simulation->sparsity_interacting},
                           {"sparsity_isolated", r.simulation->sparsity_isolated}};
    }
    j["dropped_cells"] = r.dropped_cells;
    j["gene_map"] = r.gene_map;
    j["candidates"] = r.candidates;
    j["baseline_kl"] = r.baseline_kl;
    j["search"] = {{"cost", cost_json(r.search.cost)},
                   {"evaluations", r.search.evaluations},
                   {"topology", topology_json(r.search.topology, r.gene_map, false)}};
    j["tune"] = {{"cost", cost_json(r.tune.cost)},
                 {"evaluations", r.tune.evaluations},
                 {"angles", r.tune.angles.values},
                 {"angles_wrapped", r.tune.angles.wrapped()}};
    json rows = json::array();
    for (const auto& row : r.contributions.rows) {
        rows.push_back({{"source_gene", row.source_gene},
                        {"target_gene", row.target_gene},
                        {"angle", tune::wrap_angle(row.angle)},
                        {"kl_after_prefix", row.kl_after_prefix},
                        {"kl_delta", row.kl_delta},
                        {"percent", row.percent}});
    }
    j["contributions"] = rows;
    json edges = json::array();
    for (const auto& e : r.network) {
        edges.push_back({{"source_gene", e.source_gene},
                         {"target_gene", e.target_gene},
                         {"angle", tune::wrap_angle(e.angle)},
                         {"edge_class", tune::to_string(e.edge_class)}});
    }
    j["network"] = edges;
    out << j.dump(2) << '\n';
}

void write_report_text(std::ostream& out, const RunReport& r, const RunConfig& cfg) {
    char buf[256];
    auto line = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out << buf << '\n';
    };
    const auto [ct1, ct2] = cfg.selections();
    out << "strategy: " << to_string(cfg.strategy) << (cfg.exact ? " (exact)" : " (shots)") << '\n';
    out << ct1.cell_type_label << " genes:";
    for (const auto& g : ct1.genes) {
        out << ' ' << g;
    }
    out << '\n' << ct2.cell_type_label << " genes:";
    for (const auto& g : ct2.genes) {
        out << ' ' << g;
    }
    out << '\n';
    if (r.simulation) {
        line("simulated cells: %zu, sparsity %.4f (interacting) %.4f (isolated)", r.simulation->cells,
             r.simulation->sparsity_interacting, r.simulation->sparsity_isolated);
    }
    line("candidates: %zu", r.candidates);
    line("baseline KL: %.6f", r.baseline_kl);
    line("searched KL: %.6f (%zu evaluations, %zu gates)", r.search.cost.total, r.search.evaluations,
         r.search.topology.size());
    line("tuned KL:    %.6f (%zu evaluations)", r.tune.cost.total, r.tune.evaluations);
    out << '\n';
    line("%-4s %-12s %-12s %9s %10s %10s %8s", "step", "source", "target", "theta", "KL", "KL delta", "% contrib");
    line("%-4s %-12s %-12s %9s %10.6f %10s %8s", "0", "-", "-", "-", r.contributions.baseline_kl, "-", "-");
    for (std::size_t i = 0; i < r.contributions.rows.size(); ++i) {
        const auto& row = r.contributions.rows[i];
        line("%-4zu %-12s %-12s %9.4f %10.6f %+10.6f %8.1f", i + 1, row.source_gene.c_str(), row.target_gene.c_str(),
             tune::wrap_angle(row.angle), row.kl_after_prefix, row.kl_delta, row.percent);
    }
    out << '\n';
    line("%-12s %-12s %9s  %s", "source", "target", "theta", "class");
    for (const auto& e : r.network) {
        line("%-12s %-12s %9.4f  %s", e.source_gene.c_str(), e.target_gene.c_str(), tune::wrap_angle(e.angle),
             tune::to_string(e.edge_class).c_str());
    }
}

} // namespace qxct::pipeline
