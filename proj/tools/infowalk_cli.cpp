// Command-line driver: partition / walk / train / eval stages plus a
// one-shot pipeline, all reading one flat config surface. Every stage
// writes its artifact files under --out and merges a summary into the
// run report JSON so staged runs compose into the same record a full
// pipeline run produces.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "infowalk/csr_graph.hpp"
#include "infowalk/eval.hpp"
#include "infowalk/learner.hpp"
#include "infowalk/partitioner.hpp"
#include "infowalk/run_config.hpp"
#include "infowalk/sampler.hpp"
#include "infowalk/walk_stats.hpp"

namespace iw = infowalk;
using nlohmann::json;

namespace {

struct Paths {
    std::string out;
    std::string partition() const { return out + "/partition.txt"; }
    std::string corpus() const { return out + "/corpus.txt"; }
    std::string comm() const { return out + "/comm_report.csv"; }
    std::string embeddings() const { return out + "/embeddings.txt"; }
    std::string train_log() const { return out + "/train_log.csv"; }
    std::string eval_csv() const { return out + "/eval.csv"; }
    std::string report() const { return out + "/run_report.json"; }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

json config_json(const iw::RunConfig& c) {
    return json{{"graph", c.graph_path},
                {"directed", c.directed},
                {"weighted", c.weighted},
                {"machines", c.machines},
                {"gamma", c.gamma},
                {"order", c.order},
                {"segments", c.segments},
                {"strategy", c.strategy},
                {"p", c.p},
                {"q", c.q},
                {"fixed-length", c.fixed_length},
                {"walks-per-node", c.walks_per_node},
                {"mu", c.mu},
                {"delta", c.delta},
                {"min-len", c.min_len},
                {"max-len", c.max_len},
                {"max-rounds", c.max_rounds},
                {"full-path-messages", c.full_path_messages},
                {"dim", c.dim},
                {"window", c.window},
                {"negatives", c.negatives},
                {"multi-windows", c.multi_windows},
                {"epochs", c.epochs},
                {"workers", c.workers},
                {"lr", c.lr},
                {"lr-min", c.lr_min},
                {"sync-interval", c.sync_interval},
                {"sync-every-batches", c.sync_every_batches},
                {"eval-fraction", c.eval_fraction},
                {"trials", c.trials},
                {"avg-matrices", c.avg_matrices},
                {"seed", c.seed},
                {"out", c.out_dir}};
}

// Staged commands accumulate into one report so a four-command run ends
// with the same record a pipeline run writes.
void merge_report(const Paths& paths, const iw::RunConfig& cfg,
                  const std::string& stage, const json& fragment) {
    json report;
    {
        std::ifstream in(paths.report());
        if (in) {
            try {
                in >> report;
            } catch (const json::parse_error&) {
                report = json::object();
            }
        }
    }
    if (!report.is_object()) report = json::object();
    report["config"] = config_json(cfg);
    report["stages"][stage] = fragment;
    std::ofstream out(paths.report());
    if (!out)
        throw std::runtime_error("cannot write run report: " + paths.report());
    out << report.dump(2) << '\n';
}

iw::CsrGraph load_graph(const iw::RunConfig& cfg) {
    return iw::load_edge_list(cfg.graph_path, cfg.directed, cfg.weighted);
}

json cmd_partition(const iw::RunConfig& cfg, const Paths& paths,
                   const std::string& partitioner) {
    auto t0 = std::chrono::steady_clock::now();
    iw::CsrGraph g = load_graph(cfg);
    iw::StreamOrder order = iw::parse_stream_order(cfg.order);
    uint64_t seed = iw::stage_seed(cfg.seed, iw::Stage::partition);

    iw::PartitionAssignment a;
    if (partitioner == "hash")
        a = iw::partition_hash(g, cfg.machines);
    else if (cfg.segments > 1)
        a = iw::partition_parallel(g, cfg.machines, cfg.gamma, cfg.segments, order,
                                   seed);
    else
        a = iw::partition_stream(g, cfg.machines, cfg.gamma, order, seed);

    iw::write_partition(a, paths.partition());
    uint64_t cut = iw::edge_cut(g, a.owner);
    uint64_t undirected_edges = g.directed() ? g.edge_count() : g.edge_count() / 2;

    json frag{{"seconds", seconds_since(t0)},
              {"machines", cfg.machines},
              {"partitioner", partitioner},
              {"order", cfg.order},
              {"gamma", cfg.gamma},
              {"segments", cfg.segments},
              {"sizes", a.sizes},
              {"edge_cut", cut},
              {"edges", undirected_edges},
              {"file", paths.partition()}};
    std::cout << "partition: " << cfg.machines << " machines, edge cut " << cut
              << "/" << undirected_edges << ", " << frag["seconds"].get<double>()
              << "s\n";
    return frag;
}

json cmd_walk(const iw::RunConfig& cfg, const Paths& paths,
              const std::string& partition_file) {
    auto t0 = std::chrono::steady_clock::now();
    iw::CsrGraph g = load_graph(cfg);
    std::string pfile = partition_file.empty() ? paths.partition() : partition_file;
    iw::PartitionAssignment a = iw::read_partition(pfile);
    if (a.owner.size() != g.node_count())
        throw std::runtime_error("partition file covers " +
                                 std::to_string(a.owner.size()) + " nodes, graph has " +
                                 std::to_string(g.node_count()));
    if (a.m > cfg.machines)
        throw std::runtime_error("partition file references machine " +
                                 std::to_string(a.m - 1) + " but --machines is " +
                                 std::to_string(cfg.machines));

    iw::LogicalCluster cluster(g, a.owner, cfg.machines, cfg.walk_config());
    iw::WalkResult result = cluster.run_walks();
    iw::write_corpus(result.corpus, paths.corpus());
    iw::write_comm_report(result.comm, paths.comm());
    iw::CorpusSummary cs = iw::summarize_corpus(result.corpus);

    json frag{{"seconds", seconds_since(t0)},
              {"strategy", cfg.strategy},
              {"rounds", result.rounds},
              {"walks", cs.walks},
              {"tokens", cs.tokens},
              {"min_len", cs.min_len},
              {"max_len", cs.max_len},
              {"mean_len", cs.mean_len},
              {"msgs_sent", result.comm.total_msgs()},
              {"bytes_sent", result.comm.total_bytes()},
              {"local_steps", result.comm.total_steps()},
              {"divergence_by_round", result.divergence_by_round},
              {"corpus_file", paths.corpus()},
              {"comm_file", paths.comm()}};
    std::cout << "walk: " << cs.walks << " walks, " << cs.tokens << " tokens over "
              << result.rounds << " rounds, " << result.comm.total_msgs()
              << " msgs / " << result.comm.total_bytes() << " bytes, "
              << frag["seconds"].get<double>() << "s\n";
    return frag;
}

json cmd_train(const iw::RunConfig& cfg, const Paths& paths,
               const std::string& corpus_file) {
    auto t0 = std::chrono::steady_clock::now();
    iw::CsrGraph g = load_graph(cfg);
    std::string cfile = corpus_file.empty() ? paths.corpus() : corpus_file;
    iw::Corpus corpus = iw::read_corpus(cfile);

    iw::TrainResult tr = iw::train(corpus, cfg.machines, cfg.workers, cfg.epochs,
                                   cfg.train_params(g.node_count()));
    iw::write_embeddings_text(tr.store, paths.embeddings());
    iw::write_train_log(tr.log, paths.train_log());

    double final_loss = tr.log.empty() ? 0.0 : tr.log.back().loss;
    json frag{{"seconds", seconds_since(t0)},
              {"epochs", cfg.epochs},
              {"dim", cfg.dim},
              {"final_loss", final_loss},
              {"synced_rows", tr.synced_rows},
              {"bytes_synced", tr.bytes_synced},
              {"embeddings_file", paths.embeddings()},
              {"log_file", paths.train_log()}};
    std::cout << "train: " << cfg.epochs << " epochs, final loss " << final_loss
              << ", " << frag["seconds"].get<double>() << "s\n";
    return frag;
}

json cmd_eval(const iw::RunConfig& cfg, const Paths& paths) {
    auto t0 = std::chrono::steady_clock::now();
    iw::CsrGraph g = load_graph(cfg);

    // Embeddings must be retrained per split (scoring removed edges with
    // embeddings trained on them would leak), so each trial runs the walk
    // and training stages on its own train graph. The partitioning cannot
    // change which walks come out — draws never depend on machine
    // placement — so trials use the cheap balanced partition.
    auto embed = [&](const iw::CsrGraph& train_graph, uint64_t trial_seed) {
        iw::PartitionAssignment a = iw::partition_hash(train_graph, cfg.machines);
        iw::WalkConfig wc = cfg.walk_config();
        wc.seed = iw::stage_seed(trial_seed, iw::Stage::walk);
        iw::LogicalCluster cluster(train_graph, a.owner, cfg.machines, wc);
        iw::Corpus corpus = cluster.run_walks().corpus;
        iw::TrainParams tp = cfg.train_params(train_graph.node_count());
        tp.seed = iw::stage_seed(trial_seed, iw::Stage::train);
        iw::TrainResult tr =
            iw::train(corpus, cfg.machines, cfg.workers, cfg.epochs, tp);
        iw::Embeddings emb = iw::embeddings_from_store(tr.store);
        if (cfg.avg_matrices) {
            for (size_t v = 0; v < tr.store.node_count; ++v) {
                auto out =
                    tr.store.out_row(tr.store.row_of(static_cast<iw::node_t>(v)));
                for (uint32_t x = 0; x < tr.store.d; ++x)
                    emb.vecs[v * tr.store.d + x] =
                        0.5 * (emb.vecs[v * tr.store.d + x] + out[x]);
            }
        }
        return emb;
    };

    iw::EvalSummary summary =
        iw::repeat_eval(g, cfg.eval_fraction, cfg.trials,
                        iw::stage_seed(cfg.seed, iw::Stage::eval), embed);
    iw::write_eval_csv(summary, paths.eval_csv());

    json frag{{"seconds", seconds_since(t0)},
              {"trials", cfg.trials},
              {"fraction", cfg.eval_fraction},
              {"auc_mean", summary.mean},
              {"auc_stddev", summary.stddev},
              {"file", paths.eval_csv()}};
    std::cout << "eval: AUC " << summary.mean << " +/- " << summary.stddev
              << " over " << cfg.trials << " trials, "
              << frag["seconds"].get<double>() << "s\n";
    return frag;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"information-centric random-walk graph embedding"};
    app.fallthrough();

    iw::RunConfig cfg;
    std::string partitioner = "stream";
    std::string partition_file;
    std::string corpus_file;

    app.set_config("--config", "", "flat key=value config file");
    app.add_option("--graph", cfg.graph_path, "edge-list file (src dst [weight])");
    app.add_flag("--directed", cfg.directed, "treat edges as directed");
    app.add_flag("--weighted", cfg.weighted, "third column carries edge weights");
    app.add_option("--machines", cfg.machines, "logical machine count");
    app.add_option("--gamma", cfg.gamma, "partition slack factor (>= 1)");
    app.add_option("--order", cfg.order,
                   "stream order: random|bfs-degree|dfs-degree");
    app.add_option("--segments", cfg.segments, "parallel partitioning segments");
    app.add_option("--partitioner", partitioner, "stream|hash");
    app.add_option("--strategy", cfg.strategy, "huge|deepwalk|node2vec");
    app.add_option("--p", cfg.p, "node2vec return parameter");
    app.add_option("--q", cfg.q, "node2vec in-out parameter");
    app.add_option("--fixed-length", cfg.fixed_length,
                   "walk length for fixed-length strategies");
    app.add_option("--walks-per-node", cfg.walks_per_node,
                   "rounds for fixed-length strategies");
    app.add_option("--mu", cfg.mu, "information-stop correlation threshold");
    app.add_option("--delta", cfg.delta, "round-convergence divergence threshold");
    app.add_option("--min-len", cfg.min_len, "information-stop warm-up length");
    app.add_option("--max-len", cfg.max_len, "information-stop hard cap");
    app.add_option("--max-rounds", cfg.max_rounds, "adaptive round cap");
    app.add_flag("--full-path-messages", cfg.full_path_messages,
                 "baseline mode: ship whole paths between machines");
    app.add_option("--dim", cfg.dim, "embedding dimension");
    app.add_option("--window", cfg.window, "skip-gram window size");
    app.add_option("--negatives", cfg.negatives, "negative samples per step");
    app.add_option("--multi-windows", cfg.multi_windows,
                   "walks trained together per batch");
    app.add_option("--epochs", cfg.epochs, "training epochs");
    app.add_option("--workers", cfg.workers, "worker threads per machine");
    app.add_option("--lr", cfg.lr, "initial learning rate");
    app.add_option("--lr-min", cfg.lr_min, "learning-rate floor");
    app.add_option("--sync-interval", cfg.sync_interval,
                   "seconds between hotness syncs");
    app.add_option("--sync-every-batches", cfg.sync_every_batches,
                   "deterministic sync cadence (0 = wall clock)");
    app.add_option("--eval-fraction", cfg.eval_fraction,
                   "fraction of edges held out per trial");
    app.add_option("--trials", cfg.trials, "evaluation trials");
    app.add_flag("--avg-matrices", cfg.avg_matrices,
                 "score with averaged input/output vectors");
    app.add_option("--seed", cfg.seed, "root seed for all stages");
    app.add_option("--out", cfg.out_dir, "output directory");
    app.add_option("--partition-file", partition_file,
                   "partition input for the walk stage (default <out>/partition.txt)");
    app.add_option("--corpus-file", corpus_file,
                   "corpus input for the train stage (default <out>/corpus.txt)");

    auto* sub_partition =
        app.add_subcommand("partition", "stream-partition the graph");
    auto* sub_walk =
        app.add_subcommand("walk", "run random walks over a partitioned graph");
    auto* sub_train =
        app.add_subcommand("train", "train embeddings from a walk corpus");
    auto* sub_eval =
        app.add_subcommand("eval", "repeated link-prediction evaluation");
    auto* sub_pipeline =
        app.add_subcommand("pipeline", "partition, walk, train, and evaluate");
    app.require_subcommand(1);

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.validate();
        if (partitioner != "stream" && partitioner != "hash")
            throw std::invalid_argument("config: partitioner must be stream or hash");
        Paths paths{cfg.out_dir};
        std::filesystem::create_directories(cfg.out_dir);

        if (sub_partition->parsed()) {
            merge_report(paths, cfg, "partition",
                         cmd_partition(cfg, paths, partitioner));
        } else if (sub_walk->parsed()) {
            merge_report(paths, cfg, "walk", cmd_walk(cfg, paths, partition_file));
        } else if (sub_train->parsed()) {
            merge_report(paths, cfg, "train", cmd_train(cfg, paths, corpus_file));
        } else if (sub_eval->parsed()) {
            merge_report(paths, cfg, "eval", cmd_eval(cfg, paths));
        } else if (sub_pipeline->parsed()) {
            merge_report(paths, cfg, "partition",
                         cmd_partition(cfg, paths, partitioner));
            merge_report(paths, cfg, "walk", cmd_walk(cfg, paths, ""));
            merge_report(paths, cfg, "train", cmd_train(cfg, paths, ""));
            merge_report(paths, cfg, "eval", cmd_eval(cfg, paths));
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
