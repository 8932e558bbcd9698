#include "qxct/pipeline.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

namespace pl = qxct::pipeline;

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;
constexpr const char* kEnvPrefix = "QXCT_";

struct Options {
    std::string config;
    bool synthetic = false;
    std::string mono_ct1, mono_ct2, co_ct1, co_ct2;
    std::vector<std::string> ct1_genes, ct2_genes;
    std::string ct1_label = "CT1";
    std::string ct2_label = "CT2";
    int ct2_variant = 4;
    std::string strategy = "multi-epoch";
    std::uint64_t seed = 0;
    double threshold = qxct::prune::kDefaultThreshold;
    double kl_tol = 0.01;
    double eps_prune = 1e-4;
    int n_choose = 2;
    int n_epochs = 0;
    int max_depth = 12;
    int top_k = qxct::search::kDefaultTopK;
    std::uint64_t nshots = qxct::cost::kDefaultShots;
    bool exact = true;
    int workers = 1;
    std::string out = "qxct_out";
};

// QXCT_KL_TOL for --kl-tol, and so on.
std::string env_name(const std::string& long_name) {
    std::string s = kEnvPrefix;
    for (const char c : long_name) {
        s += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return s;
}

// Environment variables act like flags placed before the real ones, so they override the
// config file while explicit flags still win.
std::vector<std::string> with_env_overrides(const CLI::App& app, int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::vector<std::string> injected;
    for (const CLI::Option* opt : app.get_options()) {
        if (opt->get_lnames().empty() || opt->get_lnames().front() == "help" || opt->get_lnames().front() == "config") {
            continue;
        }
        const std::string name = opt->get_lnames().front();
        const char* value = std::getenv(env_name(name).c_str());
        if (value == nullptr) {
            continue;
        }
        bool given = false;
        for (const auto& a : args) {
            given = given || a == "--" + name || a.rfind("--" + name + "=", 0) == 0;
        }
        if (!given) {
            injected.push_back("--" + name + "=" + value);
        }
    }
    // CLI11 parses a reversed argument vector.
    std::vector<std::string> all = injected;
    all.insert(all.end(), args.begin(), args.end());
    std::reverse(all.begin(), all.end());
    return all;
}

pl::RunConfig to_run_config(const Options& o) {
    pl::RunConfig cfg;
    cfg.synthetic = o.synthetic;
    const bool any_input = !o.mono_ct1.empty() || !o.mono_ct2.empty() || !o.co_ct1.empty() || !o.co_ct2.empty();
    if (any_input) {
        if (o.mono_ct1.empty() || o.mono_ct2.empty() || o.co_ct1.empty() || o.co_ct2.empty()) {
            throw pl::ConfigError("all four input matrices (--mono-ct1, --mono-ct2, --co-ct1, --co-ct2) are required");
        }
        cfg.inputs = pl::InputPaths{o.mono_ct1, o.mono_ct2, o.co_ct1, o.co_ct2};
    }
    cfg.ct1 = {o.ct1_label, o.ct1_genes};
    cfg.ct2 = {o.ct2_label, o.ct2_genes};
    if (o.ct2_variant != 4 && o.ct2_variant != 5) {
        throw pl::ConfigError("ct2-variant must be 4 or 5");
    }
    cfg.ct2_variant = o.ct2_variant == 5 ? qxct::synth::Ct2Variant::FiveGene : qxct::synth::Ct2Variant::FourGene;
    cfg.strategy = pl::strategy_from_string(o.strategy);
    cfg.seed = o.seed;
    cfg.threshold = o.threshold;
    cfg.search.kl_tol = o.kl_tol;
    cfg.search.eps_prune = o.eps_prune;
    cfg.search.n_choose = o.n_choose;
    if (o.n_epochs > 0) {
        cfg.search.n_epochs = o.n_epochs;
    }
    cfg.search.max_depth = o.max_depth;
    cfg.search.workers = o.workers;
    cfg.top_k = o.top_k;
    cfg.nshots = o.nshots;
    cfg.exact = o.exact;
    cfg.out = o.out;
    return cfg;
}

void add_options(CLI::App& app, Options& o) {
    app.set_config("--config", "", "Flat key = value configuration file (INI/TOML); flags override it");
    app.add_flag("--synthetic", o.synthetic, "Use the simulated benchmark tissue as input");
    app.add_option("--mono-ct1", o.mono_ct1, "Non-interacting cell type 1 matrix (cells x genes, CSV/TSV)");
    app.add_option("--mono-ct2", o.mono_ct2, "Non-interacting cell type 2 matrix");
    app.add_option("--co-ct1", o.co_ct1, "Interacting cell type 1 matrix");
    app.add_option("--co-ct2", o.co_ct2, "Interacting cell type 2 matrix");
    app.add_option("--ct1-genes", o.ct1_genes, "Cell type 1 genes, first gene on qubit 0")->delimiter(',');
    app.add_option("--ct2-genes", o.ct2_genes, "Cell type 2 genes")->delimiter(',');
    app.add_option("--ct1-label", o.ct1_label, "Cell type 1 name")->capture_default_str();
    app.add_option("--ct2-label", o.ct2_label, "Cell type 2 name")->capture_default_str();
    app.add_option("--ct2-variant", o.ct2_variant, "Synthetic CT2 gene set size (4 or 5)")->capture_default_str();
    app.add_option("--strategy", o.strategy, "Topology search strategy")
        ->check(CLI::IsMember(pl::strategy_names()))
        ->capture_default_str();
    app.add_option("--seed", o.seed, "Seed for simulation, sampling, shuffling and QUBO heuristics")
        ->capture_default_str();
    app.add_option("--threshold", o.threshold, "Density-matrix pruning threshold")->capture_default_str();
    app.add_option("--kl-tol", o.kl_tol, "Significance threshold for accepting moves")->capture_default_str();
    app.add_option("--eps-prune", o.eps_prune, "Margin for accepting deletions")->capture_default_str();
    app.add_option("--n-choose", o.n_choose, "Group size of the permutation-addition move")->capture_default_str();
    app.add_option("--n-epochs", o.n_epochs, "Multi-epoch epochs (0: one per candidate)")->capture_default_str();
    app.add_option("--max-depth", o.max_depth, "Maximum number of gates")->capture_default_str();
    app.add_option("--top-k", o.top_k, "Gate sets kept from QUBO heuristics")->capture_default_str();
    app.add_option("--nshots", o.nshots, "Shots per evaluation in shots mode")->capture_default_str();
    app.add_flag("--exact", o.exact, "Exact marginals; --exact=false samples --nshots shots")->capture_default_str();
    app.add_option("--workers", o.workers, "Threads for batched cost evaluation")->capture_default_str();
    app.add_option("--out", o.out, "Output directory")->capture_default_str();
}

// Every option that differs from nothing, in flag order; `qxct run --config` on this file repeats the run.
void write_config_echo(const Options& o, const pl::RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out);
    std::ofstream out(cfg.out / "config.ini");
    auto str = [&](const char* key, const std::string& v) {
        if (!v.empty()) {
            out << key << " = \"" << v << "\"\n";
        }
    };
    auto list = [&](const char* key, const std::vector<std::string>& v) {
        std::string joined;
        for (const auto& g : v) {
            joined += (joined.empty() ? "" : ",") + g;
        }
        str(key, joined);
    };
    out.precision(17);
    out << "synthetic = " << (o.synthetic ? "true" : "false") << '\n';
    str("mono-ct1", o.mono_ct1);
    str("mono-ct2", o.mono_ct2);
    str("co-ct1", o.co_ct1);
    str("co-ct2", o.co_ct2);
    list("ct1-genes", o.ct1_genes);
    list("ct2-genes", o.ct2_genes);
    str("ct1-label", o.ct1_label);
    str("ct2-label", o.ct2_label);
    out << "ct2-variant = " << o.ct2_variant << '\n';
    str("strategy", o.strategy);
    out << "seed = " << o.seed << '\n';
    out << "threshold = " << o.threshold << '\n';
    out << "kl-tol = " << o.kl_tol << '\n';
    out << "eps-prune = " << o.eps_prune << '\n';
    out << "n-choose = " << o.n_choose << '\n';
    out << "n-epochs = " << o.n_epochs << '\n';
    out << "max-depth = " << o.max_depth << '\n';
    out << "top-k = " << o.top_k << '\n';
    out << "nshots = " << o.nshots << '\n';
    out << "exact = " << (o.exact ? "true" : "false") << '\n';
    out << "workers = " << o.workers << '\n';
    str("out", o.out);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Infer cell-cell communication circuits from paired expression data"};
    app.name("qxct");
    Options o;
    add_options(app, o);
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Full pipeline: encode, prune, search, tune, ablate, report");
    auto* simulate = app.add_subcommand("simulate", "Write the simulated benchmark matrices");
    auto* encode = app.add_subcommand("encode", "Matrices to register histograms (encoding.json)");
    auto* prune = app.add_subcommand("prune", "Candidate gates from the density-matrix difference");
    auto* search = app.add_subcommand("search", "Topology search over the candidates");
    auto* tune = app.add_subcommand("tune", "Angle tuning of the searched topology");
    auto* ablate = app.add_subcommand("ablate", "Contribution table and network of the tuned topology");
    for (auto* sub : app.get_subcommands({})) {
        sub->fallthrough();
    }

    try {
        auto args = with_env_overrides(app, argc, argv);
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        pl::RunConfig cfg = to_run_config(o);
        const bool from_source = run->parsed() || encode->parsed();
        cfg.validate(from_source);
        write_config_echo(o, cfg);

        if (run->parsed()) {
            pl::run_pipeline(cfg);
            std::ifstream report(cfg.out / "report.txt");
            std::cout << report.rdbuf();
        } else if (simulate->parsed()) {
            const auto s = pl::simulate_stage(cfg);
            std::cout << "wrote " << s.cells << " cells x " << s.genes << " genes to " << cfg.out.string()
                      << " (sparsity " << s.sparsity_interacting << ")\n";
        } else if (encode->parsed()) {
            const auto e = pl::encode_stage(cfg);
            std::cout << "encoded " << e.layout().total() << " qubits";
            if (e.dropped_cells > 0) {
                std::cout << " (dropped " << e.dropped_cells << " empty cells)";
            }
            std::cout << '\n';
        } else if (prune->parsed()) {
            std::cout << pl::prune_stage(cfg).size() << " candidate gates\n";
        } else if (search->parsed()) {
            const auto r = pl::search_stage(cfg);
            std::cout << "KL " << r.cost.total << " with " << r.topology.size() << " gates (" << r.evaluations
                      << " evaluations)\n";
        } else if (tune->parsed()) {
            const auto r = pl::tune_stage(cfg);
            std::cout << "tuned KL " << r.cost.total << '\n';
        } else if (ablate->parsed()) {
            const auto [table, edges] = pl::ablate_stage(cfg);
            std::cout << table.rows.size() << " contribution rows, final KL " << table.final_kl() << '\n';
        }
    } catch (const pl::ConfigError& e) {
        std::cerr << "qxct: configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "qxct: " << e.what() << '\n';
        return kExitDomain;
    }
    return 0;
}
