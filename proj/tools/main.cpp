#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>

#include "phsem/equivalence.hpp"
#include "phsem/experiment.hpp"
#include "phsem/io.hpp"
#include "phsem/learning.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace phsem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitDegenerate = 3;
constexpr int kExitInternal = 4;

int default_threads() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void print_json_line(const json& j) { std::cout << j.dump() << "\n"; }

// Partition for a graph document: explicit file wins, then the document's
// own partition field, then all-singletons.
Partition resolve_partition(const std::optional<std::string>& partition_path,
                            const GraphDocument& doc) {
    if (partition_path)
        return partition_from_json(read_json_file(*partition_path), doc.nodes);
    if (doc.partition)
        return partition_from_json(json(*doc.partition), doc.nodes);
    return Partition::singletons(static_cast<int>(doc.nodes.size()));
}

// Re-indexes the second document onto the first document's node order; the
// two must name the same node set.
Pdag pdag_on_shared_nodes(const GraphDocument& base,
                          const GraphDocument& other) {
    std::vector<std::string> a = base.nodes, b = other.nodes;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw InputError("graphs name different node sets");
    Pdag out(static_cast<int>(base.nodes.size()));
    for (const auto& e : other.edges) {
        const int i = node_index(base, e.from), j = node_index(base, e.to);
        if (e.directed)
            out.add_directed(i, j);
        else
            out.add_undirected(i, j);
    }
    return out;
}

Dag dag_on_shared_nodes(const GraphDocument& base,
                        const GraphDocument& other) {
    std::vector<std::string> a = base.nodes, b = other.nodes;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw InputError("graphs name different node sets");
    std::vector<Edge> edges;
    for (const auto& e : other.edges) {
        if (!e.directed)
            throw InputError("expected a DAG but found undirected edge " +
                             e.from + " - " + e.to);
        edges.emplace_back(node_index(base, e.from), node_index(base, e.to));
    }
    try {
        return Dag(static_cast<int>(base.nodes.size()), std::move(edges));
    } catch (const CyclicGraphError&) {
        throw InputError("graph has a directed cycle");
    }
}

std::string dump_graph_json(const GraphDocument& doc) {
    return graph_document_to_json(canonicalize(doc)).dump(2) + "\n";
}

void write_trace_csv(const fs::path& path,
                     const std::vector<SearchStep>& trace,
                     const std::vector<std::string>& names) {
    std::ostringstream out;
    out << "restart,step,action,from,to,bic\n";
    for (const SearchStep& step : trace) {
        out << step.restart << ',' << step.step << ',';
        if (step.edit) {
            out << edit_kind_name(step.edit->kind) << ','
                << names[step.edit->from] << ',' << names[step.edit->to];
        } else {
            out << "init,,";
        }
        out << ',' << format_double(step.score) << '\n';
    }
    write_text_file(path, out.str());
}

std::string regime_name(Regime regime) {
    return regime == Regime::sparse ? "sparse" : "dense";
}

std::string blocks_label(const SimConfig& cfg) {
    switch (cfg.blocks) {
        case BlockRecipe::two_blocks: return "two_blocks";
        case BlockRecipe::p_over_3_plus_1: return "p_over_3_plus_1";
        case BlockRecipe::custom: return "custom";
    }
    return "?";
}

struct SimulateArgs {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
};

int cmd_simulate(const SimulateArgs& args) {
    SimConfig cfg = read_sim_config(args.config);
    if (args.seed) cfg.seed = *args.seed;
    const Partition pi = partition_from_config(cfg);
    const std::vector<std::string> names = default_node_names(cfg.p);

    const TrialDraw draw = draw_trial(cfg, pi, /*replicate=*/0);

    fs::create_directories(args.out_dir);
    GraphDocument truth = document_from_dag(draw.truth, names);
    truth.partition = partition_to_names(pi, names);
    write_text_file(fs::path(args.out_dir) / "truth.json",
                    dump_graph_json(truth));
    write_text_file(fs::path(args.out_dir) / "params.json",
                    sem_params_to_json(draw.truth, draw.params, names).dump(2) +
                        "\n");
    write_data_csv(fs::path(args.out_dir) / "data.csv", names, draw.data.x);
    print_json_line({{"written", args.out_dir},
                     {"p", cfg.p},
                     {"n", cfg.n},
                     {"edges", draw.truth.edge_count()}});
    return kExitOk;
}

struct LearnArgs {
    std::string data;
    std::string partition;
    std::string out;
    std::string trace;
    int restarts = 5;
    std::size_t cap = 300;
    std::uint64_t seed = 0;
    int max_iters = 500;
    int threads = default_threads();
    double tol = kDefaultNumericTol;
};

int cmd_learn(const LearnArgs& args) {
    const CsvData csv = read_data_csv(args.data);
    const Partition pi =
        partition_from_json(read_json_file(args.partition), csv.names);

    SearchConfig cfg;
    cfg.restarts = args.restarts;
    cfg.neighborhood_cap = args.cap;
    cfg.seed = args.seed;
    cfg.max_iters = args.max_iters;
    cfg.threads = args.threads;
    cfg.numeric_tol = args.tol;

    Dataset data{csv.x};
    const SampleCov cov = sample_covariance(data, cfg.numeric_tol);
    const SearchResult result = greedy_search(cov, pi, cfg);
    const FitResult fit = fit_mle(result.best, pi, cov, cfg.numeric_tol);

    GraphDocument doc = document_from_pdag(result.cpdag, csv.names);
    doc.partition = partition_to_names(pi, csv.names);
    write_text_file(args.out, dump_graph_json(doc));
    if (!args.trace.empty()) write_trace_csv(args.trace, result.trace, csv.names);

    print_json_line({{"bic", result.score},
                     {"loglik", fit.loglik},
                     {"edges", result.best.edge_count()}});
    return kExitOk;
}

struct CpdagArgs {
    std::string graph;
    std::optional<std::string> partition;
    std::string out;
};

int cmd_cpdag(const CpdagArgs& args) {
    const GraphDocument doc =
        parse_graph_document(read_json_file(args.graph));
    const Dag g = dag_from_document(doc);
    const Partition pi = resolve_partition(args.partition, doc);
    const Pdag result = cpdag(g, pi);

    GraphDocument out = document_from_pdag(result, doc.nodes);
    out.partition = partition_to_names(pi, doc.nodes);
    const std::string text = dump_graph_json(out);
    if (!args.out.empty())
        write_text_file(args.out, text);
    else
        std::cout << text;
    return kExitOk;
}

struct EquivArgs {
    std::string graph1;
    std::string graph2;
    std::optional<std::string> partition;
};

int cmd_equiv(const EquivArgs& args) {
    const GraphDocument doc1 =
        parse_graph_document(read_json_file(args.graph1));
    const GraphDocument doc2 =
        parse_graph_document(read_json_file(args.graph2));
    const Dag g1 = dag_from_document(doc1);
    const Dag g2 = dag_on_shared_nodes(doc1, doc2);
    const Partition pi = resolve_partition(args.partition, doc1);

    const bool markov = markov_equivalent(g1, g2);
    const bool equivalent = markov && pi_equivalent(g1, g2, pi);
    print_json_line(
        {{"verdict", equivalent ? "equivalent" : "not_equivalent"},
         {"markov_equivalent", markov}});
    return kExitOk;
}

struct ScoreArgs {
    std::string graph;
    std::optional<std::string> partition;
    std::string data;
    double tol = kDefaultNumericTol;
};

int cmd_score(const ScoreArgs& args) {
    const GraphDocument doc =
        parse_graph_document(read_json_file(args.graph));
    const CsvData csv = read_data_csv(args.data);

    // Align the CSV columns with the graph's node order.
    std::vector<std::string> a = doc.nodes, b = csv.names;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw InputError("data columns and graph nodes differ");
    Eigen::MatrixXd x(csv.x.rows(), csv.x.cols());
    for (std::size_t c = 0; c < doc.nodes.size(); ++c) {
        std::size_t src = 0;
        while (csv.names[src] != doc.nodes[c]) ++src;
        x.col(static_cast<Eigen::Index>(c)) =
            csv.x.col(static_cast<Eigen::Index>(src));
    }

    const Dag g = dag_from_document(doc);
    const Partition pi = resolve_partition(args.partition, doc);
    const SampleCov cov = sample_covariance(Dataset{x}, args.tol);
    const FitResult fit = fit_mle(g, pi, cov, args.tol);
    print_json_line({{"bic", fit.bic}, {"loglik", fit.loglik}});
    return kExitOk;
}

struct ShdArgs {
    std::string graph1;
    std::string graph2;
};

int cmd_shd(const ShdArgs& args) {
    const GraphDocument doc1 =
        parse_graph_document(read_json_file(args.graph1));
    const GraphDocument doc2 =
        parse_graph_document(read_json_file(args.graph2));
    const Pdag a = pdag_from_document(doc1);
    const Pdag b = pdag_on_shared_nodes(doc1, doc2);
    print_json_line({{"shd", shd(a, b)}});
    return kExitOk;
}

struct ExperimentArgs {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    int threads = default_threads();
};

void write_results_csv(const fs::path& path, const SimConfig& cfg,
                       const ExperimentResult& result) {
    std::ostringstream out;
    out << "replicate,p,n,regime,blocks,shd_gev,shd_baseline_pi_min,"
           "bic_gev,bic_baseline,runtime_gev_s,runtime_baseline_s,error\n";
    for (const TrialResult& t : result.trials) {
        out << t.replicate << ',' << cfg.p << ',' << cfg.n << ','
            << regime_name(cfg.regime) << ',' << blocks_label(cfg) << ',';
        if (t.error.empty()) {
            out << t.shd_gev << ',' << t.shd_baseline_pi_min << ','
                << format_double(t.bic_gev) << ','
                << format_double(t.bic_baseline) << ',';
        } else {
            out << ",,,,";
        }
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", t.runtime_gev);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.6f", t.runtime_baseline);
        out << buf << ',' << t.error << '\n';
    }
    write_text_file(path, out.str());
}

json quartiles_json(const Quartiles& q) {
    return {{"q25", q.q25}, {"median", q.median}, {"q75", q.q75}};
}

int cmd_experiment(const ExperimentArgs& args) {
    SimConfig cfg = read_sim_config(args.config);
    if (args.seed) cfg.seed = *args.seed;
    cfg.threads = args.threads;

    const ExperimentResult result = run_experiment(cfg);

    fs::create_directories(args.out_dir);
    write_results_csv(fs::path(args.out_dir) / "results.csv", cfg, result);

    json summary = {
        {"config",
         {{"p", cfg.p},
          {"n", cfg.n},
          {"regime", regime_name(cfg.regime)},
          {"blocks", blocks_label(cfg)},
          {"replicates", cfg.replicates},
          {"seed", cfg.seed},
          {"restarts", cfg.restarts},
          {"neighborhood_cap", cfg.neighborhood_cap},
          {"max_iters", cfg.max_iters}}},
        {"trials_ok", result.summary.trials_ok},
        {"trials_failed", result.summary.trials_failed},
        {"shd_gev", quartiles_json(result.summary.shd_gev)},
        {"shd_baseline_pi_min",
         quartiles_json(result.summary.shd_baseline_pi_min)}};
    write_text_file(fs::path(args.out_dir) / "summary.json",
                    summary.dump(2) + "\n");
    print_json_line({{"written", args.out_dir},
                     {"trials_ok", result.summary.trials_ok},
                     {"trials_failed", result.summary.trials_failed}});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Causal structure discovery for linear Gaussian SEMs with "
        "groupwise equal error variances"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim = app.add_subcommand(
        "simulate", "Draw a random model and write truth, parameters, data");
    sim->add_option("--config", sim_args.config, "JSON config file")
        ->required();
    sim->add_option("--out", sim_args.out_dir, "output directory")->required();
    std::uint64_t sim_seed = 0;
    auto* sim_seed_opt =
        sim->add_option("--seed", sim_seed, "override config seed");

    LearnArgs learn_args;
    auto* learn = app.add_subcommand(
        "learn", "Greedy BIC search for the CPDAG under a variance partition");
    learn->add_option("--data", learn_args.data, "data CSV")->required();
    learn->add_option("--partition", learn_args.partition, "partition JSON")
        ->required();
    learn->add_option("--out", learn_args.out, "output CPDAG JSON")
        ->required();
    learn->add_option("--trace", learn_args.trace, "iteration log CSV");
    learn->add_option("--restarts", learn_args.restarts, "search restarts");
    learn->add_option("--cap", learn_args.cap, "neighborhood size bound");
    learn->add_option("--seed", learn_args.seed, "search seed");
    learn->add_option("--max-iters", learn_args.max_iters,
                      "max steps per restart");
    learn->add_option("--threads", learn_args.threads, "worker threads");
    learn->add_option("--tol", learn_args.tol, "numeric tolerance");

    CpdagArgs cpdag_args;
    std::string cpdag_partition;
    auto* cpdag_cmd = app.add_subcommand(
        "cpdag", "CPDAG of a DAG's equivalence class under a partition");
    cpdag_cmd->add_option("--graph", cpdag_args.graph, "graph JSON")
        ->required();
    auto* cpdag_part_opt =
        cpdag_cmd->add_option("--partition", cpdag_partition, "partition JSON");
    cpdag_cmd->add_option("--out", cpdag_args.out, "output JSON");

    EquivArgs equiv_args;
    std::string equiv_partition;
    auto* equiv = app.add_subcommand(
        "equiv", "Decide model equivalence of two DAGs under a partition");
    equiv->add_option("--graph1", equiv_args.graph1, "first graph JSON")
        ->required();
    equiv->add_option("--graph2", equiv_args.graph2, "second graph JSON")
        ->required();
    auto* equiv_part_opt =
        equiv->add_option("--partition", equiv_partition, "partition JSON");

    ScoreArgs score_args;
    std::string score_partition;
    auto* score = app.add_subcommand(
        "score", "BIC score of a DAG and partition on data");
    score->add_option("--graph", score_args.graph, "graph JSON")->required();
    auto* score_part_opt =
        score->add_option("--partition", score_partition, "partition JSON");
    score->add_option("--data", score_args.data, "data CSV")->required();
    score->add_option("--tol", score_args.tol, "numeric tolerance");

    ShdArgs shd_args;
    auto* shd_cmd = app.add_subcommand(
        "shd", "Modified structural Hamming distance of two graphs");
    shd_cmd->add_option("--graph1", shd_args.graph1, "first graph JSON")
        ->required();
    shd_cmd->add_option("--graph2", shd_args.graph2, "second graph JSON")
        ->required();

    ExperimentArgs exp_args;
    auto* exp = app.add_subcommand(
        "experiment",
        "Replicated recovery study and SHD summary for a configuration");
    exp->add_option("--config", exp_args.config, "JSON config file")
        ->required();
    exp->add_option("--out", exp_args.out_dir, "output directory")->required();
    std::uint64_t exp_seed = 0;
    auto* exp_seed_opt =
        exp->add_option("--seed", exp_seed, "override config seed");
    exp->add_option("--threads", exp_args.threads, "worker threads");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (sim->parsed()) {
            if (*sim_seed_opt) sim_args.seed = sim_seed;
            return cmd_simulate(sim_args);
        }
        if (learn->parsed()) return cmd_learn(learn_args);
        if (cpdag_cmd->parsed()) {
            if (*cpdag_part_opt) cpdag_args.partition = cpdag_partition;
            return cmd_cpdag(cpdag_args);
        }
        if (equiv->parsed()) {
            if (*equiv_part_opt) equiv_args.partition = equiv_partition;
            return cmd_equiv(equiv_args);
        }
        if (score->parsed()) {
            if (*score_part_opt) score_args.partition = score_partition;
            return cmd_score(score_args);
        }
        if (shd_cmd->parsed()) return cmd_shd(shd_args);
        if (exp->parsed()) {
            if (*exp_seed_opt) exp_args.seed = exp_seed;
            return cmd_experiment(exp_args);
        }
    } catch (const DegenerateDataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const SingularRegressionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const InternalInconsistencyError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitInput;
}
