#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "learner.hpp"
#include "partitioner.hpp"
#include "rng.hpp"
#include "sampler.hpp"

namespace infowalk {

// Deterministic per-stage seeds derived from one root seed, so stages can
// re-run independently yet reproduce the exact pipeline behavior.
enum class Stage : uint64_t { partition = 1, walk = 2, train = 3, eval = 4 };

inline uint64_t stage_seed(uint64_t root, Stage s) {
    return mix64(root, static_cast<uint64_t>(s));
}

// Everything a full run needs. Field names mirror the CLI flags and config
// keys one-to-one.
struct RunConfig {
    std::string graph_path;
    bool directed = false;
    bool weighted = false;

    uint32_t machines = 1;
    double gamma = 2.0;
    std::string order = "dfs-degree";
    uint32_t segments = 1; // >1 partitions the stream in parallel segments

    std::string strategy = "huge";
    double p = 1.0;
    double q = 1.0;
    uint64_t fixed_length = 80;
    uint64_t walks_per_node = 10;
    double mu = 0.995;
    double delta = 0.001;
    uint64_t min_len = 5;
    uint64_t max_len = 80;
    uint64_t max_rounds = 100;
    bool full_path_messages = false;

    uint32_t dim = 128;
    uint32_t window = 10;
    uint32_t negatives = 5;
    uint32_t multi_windows = 2;
    uint32_t epochs = 1;
    uint32_t workers = 1;
    double lr = 0.025;
    double lr_min = 0.0001;
    double sync_interval = 0.1;      // seconds of wall clock between syncs
    uint64_t sync_every_batches = 0; // >0 switches to deterministic cadence

    double eval_fraction = 0.5;
    uint32_t trials = 5;
    bool avg_matrices = false;

    uint64_t seed = 1;
    std::string out_dir = "out";

    void validate() const {
        auto fail = [](const std::string& what) {
            throw std::invalid_argument("config: " + what);
        };
        if (graph_path.empty()) fail("graph path is required");
        if (machines == 0) fail("machines must be >= 1");
        if (gamma < 1.0) fail("gamma must be >= 1");
        if (segments == 0) fail("segments must be >= 1");
        parse_stream_order(order); // throws on bad value
        parse_strategy(strategy);
        if (!(p > 0.0)) fail("p must be > 0");
        if (!(q > 0.0)) fail("q must be > 0");
        if (fixed_length == 0) fail("fixed-length must be >= 1");
        if (walks_per_node == 0) fail("walks-per-node must be >= 1");
        if (!(mu > 0.0 && mu <= 1.0)) fail("mu must be in (0, 1]");
        if (!(delta >= 0.0)) fail("delta must be >= 0");
        if (min_len == 0) fail("min-len must be >= 1");
        if (min_len > max_len) fail("min-len must not exceed max-len");
        if (max_rounds == 0) fail("max-rounds must be >= 1");
        if (dim == 0) fail("dim must be >= 1");
        if (window == 0) fail("window must be >= 1");
        if (negatives == 0) fail("negatives must be >= 1");
        if (multi_windows == 0) fail("multi-windows must be >= 1");
        if (epochs == 0) fail("epochs must be >= 1");
        if (workers == 0) fail("workers must be >= 1");
        if (!(lr > 0.0)) fail("lr must be > 0");
        if (!(lr_min >= 0.0)) fail("lr-min must be >= 0");
        if (!(sync_interval > 0.0)) fail("sync-interval must be > 0");
        if (!(eval_fraction > 0.0 && eval_fraction < 1.0))
            fail("eval-fraction must be in (0, 1)");
        if (trials == 0) fail("trials must be >= 1");
    }

    WalkConfig walk_config() const {
        WalkConfig wc;
        wc.strategy = parse_strategy(strategy);
        wc.p = p;
        wc.q = q;
        wc.mu = mu;
        wc.delta = delta;
        wc.min_len = min_len;
        wc.max_len = max_len;
        wc.fixed_len = fixed_length;
        wc.walks_per_node = walks_per_node;
        wc.max_rounds = max_rounds;
        wc.full_path_messages = full_path_messages;
        wc.seed = stage_seed(seed, Stage::walk);
        return wc;
    }

    TrainParams train_params(uint32_t node_count) const {
        TrainParams tp;
        tp.node_count = node_count;
        tp.d = dim;
        tp.window = window;
        tp.negatives = negatives;
        tp.window_count = multi_windows;
        tp.lr_start = lr;
        tp.lr_min = lr_min;
        if (sync_every_batches > 0) {
            tp.sync_mode = SyncMode::every_n_batches;
            tp.sync_every_batches = sync_every_batches;
        } else {
            tp.sync_mode = SyncMode::wall_clock;
            tp.sync_interval_sec = sync_interval;
        }
        tp.seed = stage_seed(seed, Stage::train);
        return tp;
    }
};

} // namespace infowalk
