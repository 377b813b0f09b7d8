#pragma once

#include <algorithm>
#include <atomic>
#include <cassert>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "rng.hpp"
#include "sampler.hpp"
#include "walk_stats.hpp"

namespace infowalk {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// -log(sigmoid(x)), computed without overflow for large |x|.
inline double neg_log_sigmoid(double x) {
    return std::max(-x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

// Rows sharing one corpus frequency, contiguous because rows are ordered
// by descending frequency. Syncing one sampled row per block keeps hot
// (frequently written) rows fresh everywhere at a cost bounded by the
// number of distinct frequencies instead of the node count.
struct HotnessBlock {
    uint64_t frequency = 0;
    uint32_t begin = 0; // row range [begin, end)
    uint32_t end = 0;
};

// Input and output embedding matrices, row-major, with rows permuted by
// descending corpus frequency (ties by node id). The permutation keeps
// hot rows adjacent so block bookkeeping and sync stay cheap.
struct EmbeddingStore {
    uint32_t node_count = 0;
    uint32_t d = 0;
    std::vector<double> phi_in;       // [node_count x d]
    std::vector<double> phi_out;      // [node_count x d]
    std::vector<uint32_t> node_to_row;
    std::vector<uint32_t> row_to_node;
    std::vector<HotnessBlock> blocks;

    uint32_t row_of(node_t v) const {
        assert(v < node_count);
        return node_to_row[v];
    }
    node_t node_of(uint32_t row) const {
        assert(row < node_count);
        return row_to_node[row];
    }
    std::span<double> in_row(uint32_t row) {
        return {phi_in.data() + static_cast<size_t>(row) * d, d};
    }
    std::span<const double> in_row(uint32_t row) const {
        return {phi_in.data() + static_cast<size_t>(row) * d, d};
    }
    std::span<double> out_row(uint32_t row) {
        return {phi_out.data() + static_cast<size_t>(row) * d, d};
    }
    std::span<const double> out_row(uint32_t row) const {
        return {phi_out.data() + static_cast<size_t>(row) * d, d};
    }

    bool layout_matches(const EmbeddingStore& o) const {
        return node_count == o.node_count && d == o.d &&
               row_to_node == o.row_to_node;
    }
};

// Builds the frequency-ordered store: input rows start uniform in
// [-0.5/d, 0.5/d], output rows start at zero.
inline EmbeddingStore build_store(const CorpusStats& stats, uint32_t d,
                                  uint64_t seed) {
    if (d == 0) throw std::invalid_argument("embedding dimension must be >= 1");
    if (stats.total == 0) throw std::invalid_argument("corpus is empty");
    uint32_t n = static_cast<uint32_t>(stats.occurrences.size());

    EmbeddingStore s;
    s.node_count = n;
    s.d = d;
    s.row_to_node.resize(n);
    for (uint32_t v = 0; v < n; ++v) s.row_to_node[v] = v;
    std::sort(s.row_to_node.begin(), s.row_to_node.end(), [&](node_t a, node_t b) {
        if (stats.occurrences[a] != stats.occurrences[b])
            return stats.occurrences[a] > stats.occurrences[b];
        return a < b;
    });
    s.node_to_row.resize(n);
    for (uint32_t r = 0; r < n; ++r) s.node_to_row[s.row_to_node[r]] = r;

    for (uint32_t r = 0; r < n; ++r) {
        uint64_t f = stats.occurrences[s.row_to_node[r]];
        if (s.blocks.empty() || s.blocks.back().frequency != f)
            s.blocks.push_back({f, r, r + 1});
        else
            s.blocks.back().end = r + 1;
    }

    s.phi_in.resize(static_cast<size_t>(n) * d);
    s.phi_out.assign(static_cast<size_t>(n) * d, 0.0);
    Rng rng(mix64(seed, 0x1e5bedd1));
    double scale = 0.5 / static_cast<double>(d);
    for (double& x : s.phi_in) x = rng.next_range(-scale, scale);
    return s;
}

// Cumulative table for drawing negatives from the corpus unigram
// distribution raised to 3/4. Rows with zero frequency carry no mass and
// are never drawn; frequency ordering puts them in a suffix.
class NegativeTable {
public:
    NegativeTable(const CorpusStats& stats, const EmbeddingStore& store) {
        cum_.reserve(store.node_count);
        double acc = 0.0;
        for (uint32_t r = 0; r < store.node_count; ++r) {
            uint64_t f = stats.occurrences[store.node_of(r)];
            if (f == 0) break; // zero-frequency suffix
            acc += std::pow(static_cast<double>(f), 0.75);
            cum_.push_back(acc);
        }
        if (cum_.empty())
            throw std::invalid_argument("negative table needs a non-empty corpus");
    }

    uint32_t sample(Rng& rng) const {
        double target = rng.next_unit() * cum_.back();
        auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
        if (it == cum_.end()) --it;
        return static_cast<uint32_t>(it - cum_.begin());
    }

    size_t support() const { return cum_.size(); }

private:
    std::vector<double> cum_; // indexed by row
};

// K negatives per step for L steps, drawn up front into one buffer.
inline std::vector<uint32_t> sample_negatives(const NegativeTable& table,
                                              uint32_t k, uint64_t l, Rng& rng) {
    if (k == 0 || l == 0)
        throw std::invalid_argument("need at least one negative sample");
    std::vector<uint32_t> rows(static_cast<size_t>(k) * l);
    for (auto& r : rows) r = table.sample(rng);
    return rows;
}

// One plain skip-gram/negative-sampling step on the global matrices:
// push the context toward the target and away from each negative. The
// context row is read-frozen for the whole pair; output rows update in
// sequence. Touches phi_in(context) and phi_out(target/negatives).
inline void sgns_pair_update(EmbeddingStore& store, uint32_t target_row,
                             uint32_t context_row,
                             std::span<const uint32_t> negative_rows, double lr) {
    uint32_t d = store.d;
    std::span<double> ctx = store.in_row(context_row);
    std::vector<double> ctx_delta(d, 0.0);
    auto apply = [&](uint32_t out_r, double label) {
        std::span<double> out = store.out_row(out_r);
        double s = 0.0;
        for (uint32_t i = 0; i < d; ++i) s += ctx[i] * out[i];
        double g = lr * (label - sigmoid(s));
        for (uint32_t i = 0; i < d; ++i) {
            ctx_delta[i] += g * out[i];
            out[i] += g * ctx[i];
        }
    };
    apply(target_row, 1.0);
    for (uint32_t nr : negative_rows) apply(nr, 0.0);
    for (uint32_t i = 0; i < d; ++i) ctx[i] += ctx_delta[i];
}

// Worker-private copies of the rows a batch touches. All gradient work in
// a lifetime (one batch of walks) lands here; the global matrices see the
// result exactly once, at flush.
struct WorkerBuffers {
    std::unordered_map<uint32_t, std::vector<double>> in_rows;
    std::unordered_map<uint32_t, std::vector<double>> out_rows;
    uint64_t flushes = 0;

    std::vector<double>& in(const EmbeddingStore& s, uint32_t row) {
        auto it = in_rows.find(row);
        if (it == in_rows.end()) {
            auto src = s.in_row(row);
            it = in_rows.emplace(row, std::vector<double>(src.begin(), src.end()))
                     .first;
        }
        return it->second;
    }
    std::vector<double>& out(const EmbeddingStore& s, uint32_t row) {
        auto it = out_rows.find(row);
        if (it == out_rows.end()) {
            auto src = s.out_row(row);
            it = out_rows.emplace(row, std::vector<double>(src.begin(), src.end()))
                     .first;
        }
        return it->second;
    }

    // Write-back. Unsynchronized by design: concurrent workers may overlap
    // on hot rows and the last flush wins; training tolerates the loss.
    void flush(EmbeddingStore& s) {
        for (auto& [row, vals] : in_rows)
            std::copy(vals.begin(), vals.end(), s.in_row(row).begin());
        for (auto& [row, vals] : out_rows)
            std::copy(vals.begin(), vals.end(), s.out_row(row).begin());
        in_rows.clear();
        out_rows.clear();
        flushes++;
    }
};

struct BatchStats {
    uint64_t nodes = 0;   // walk tokens consumed (for the lr schedule)
    uint64_t pairs = 0;   // positive (context, target) pairs
    uint64_t terms = 0;   // scored (context, column) entries
    double nll = 0.0;     // sum of per-term negative log-likelihood
};

// Batched skip-gram over window_count walks advancing in lockstep: one
// sliding position across all walks, one draw of K negatives shared by
// every context in the batch, and each walk's target doubling as an extra
// negative for the other walks' contexts. Per position the update is a
// dense (contexts x columns) product against values frozen at the start
// of the position, accumulated into the worker buffers — the global
// matrices are not touched here.
inline BatchStats train_multiwindow(EmbeddingStore& store, WorkerBuffers& buf,
                                    std::span<const std::span<const node_t>> walks,
                                    uint32_t k, uint32_t w, double lr,
                                    const NegativeTable& neg_table, Rng& rng) {
    if (walks.empty()) return {};
    if (k == 0 || w == 0)
        throw std::invalid_argument("window and negative count must be >= 1");

    BatchStats bs;
    size_t max_len = 0;
    for (auto& walk : walks) {
        max_len = std::max(max_len, walk.size());
        bs.nodes += walk.size();
        // Lifetime prefetch: every walk node's rows enter the buffers.
        for (node_t v : walk) {
            uint32_t r = store.row_of(v);
            buf.in(store, r);
            buf.out(store, r);
        }
    }
    if (max_len == 0) return bs;

    std::vector<uint32_t> negatives =
        sample_negatives(neg_table, k, max_len, rng);
    for (uint32_t r : negatives) buf.out(store, r);

    uint32_t d = store.d;
    std::vector<uint32_t> ctx_rows, col_rows;
    std::vector<uint32_t> ctx_walk; // which walk each context row came from
    std::vector<int> col_walk;      // walk owning the column target, -1 = negative
    std::vector<double> frozen_ctx, frozen_col, grads;

    for (size_t t = 0; t < max_len; ++t) {
        ctx_rows.clear();
        col_rows.clear();
        ctx_walk.clear();
        col_walk.clear();

        for (size_t j = 0; j < walks.size(); ++j) {
            const auto& walk = walks[j];
            if (t >= walk.size()) continue; // this walk already ended
            col_rows.push_back(store.row_of(walk[t]));
            col_walk.push_back(static_cast<int>(j));
            size_t lo = t > w ? t - w : 0;
            size_t hi = std::min(walk.size(), t + w + 1);
            for (size_t pos = lo; pos < hi; ++pos) {
                if (pos == t) continue;
                ctx_rows.push_back(store.row_of(walk[pos]));
                ctx_walk.push_back(static_cast<uint32_t>(j));
            }
        }
        if (ctx_rows.empty()) continue;
        for (uint32_t i = 0; i < k; ++i) {
            col_rows.push_back(negatives[t * k + i]);
            col_walk.push_back(-1);
        }

        size_t nc = ctx_rows.size(), no = col_rows.size();
        frozen_ctx.assign(nc * d, 0.0);
        frozen_col.assign(no * d, 0.0);
        for (size_t i = 0; i < nc; ++i) {
            auto& row = buf.in(store, ctx_rows[i]);
            std::copy(row.begin(), row.end(), frozen_ctx.begin() + i * d);
        }
        for (size_t j = 0; j < no; ++j) {
            auto& row = buf.out(store, col_rows[j]);
            std::copy(row.begin(), row.end(), frozen_col.begin() + j * d);
        }

        // grads[i,j] = lr * (label - sigmoid(<ctx_i, col_j>))
        grads.assign(nc * no, 0.0);
        for (size_t i = 0; i < nc; ++i) {
            for (size_t j = 0; j < no; ++j) {
                double s = 0.0;
                const double* c = frozen_ctx.data() + i * d;
                const double* o = frozen_col.data() + j * d;
                for (uint32_t x = 0; x < d; ++x) s += c[x] * o[x];
                bool positive = col_walk[j] >= 0 &&
                                static_cast<uint32_t>(col_walk[j]) == ctx_walk[i];
                grads[i * no + j] = lr * ((positive ? 1.0 : 0.0) - sigmoid(s));
                bs.nll += neg_log_sigmoid(positive ? s : -s);
                bs.terms++;
            }
            bs.pairs++;
        }

        // delta_ctx = grads * frozen_col ; delta_col = grads^T * frozen_ctx
        for (size_t i = 0; i < nc; ++i) {
            auto& row = buf.in(store, ctx_rows[i]);
            for (size_t j = 0; j < no; ++j) {
                double g = grads[i * no + j];
                if (g == 0.0) continue;
                const double* o = frozen_col.data() + j * d;
                for (uint32_t x = 0; x < d; ++x) row[x] += g * o[x];
            }
        }
        for (size_t j = 0; j < no; ++j) {
            auto& row = buf.out(store, col_rows[j]);
            for (size_t i = 0; i < nc; ++i) {
                double g = grads[i * no + j];
                if (g == 0.0) continue;
                const double* c = frozen_ctx.data() + i * d;
                for (uint32_t x = 0; x < d; ++x) row[x] += g * c[x];
            }
        }
    }
    return bs;
}

struct SyncStats {
    uint64_t rows = 0;
    uint64_t bytes = 0;
};

// Cross-machine refresh: one uniformly sampled row per hotness block has
// its input and output vectors averaged across machines and written back
// everywhere. Wire cost is rows * d * 8 bytes shipped by each machine.
inline SyncStats sync_hotness(std::span<EmbeddingStore> stores, Rng& rng) {
    if (stores.size() <= 1) return {};
    for (size_t i = 1; i < stores.size(); ++i)
        if (!stores[i].layout_matches(stores[0]))
            throw std::invalid_argument("sync requires identical store layouts");

    SyncStats st;
    double inv_m = 1.0 / static_cast<double>(stores.size());
    uint32_t d = stores[0].d;
    std::vector<double> avg_in(d), avg_out(d);
    for (const HotnessBlock& b : stores[0].blocks) {
        uint32_t row = b.begin + static_cast<uint32_t>(
                                     rng.next_below(b.end - b.begin));
        std::fill(avg_in.begin(), avg_in.end(), 0.0);
        std::fill(avg_out.begin(), avg_out.end(), 0.0);
        for (auto& s : stores) {
            auto in = s.in_row(row);
            auto out = s.out_row(row);
            for (uint32_t x = 0; x < d; ++x) {
                avg_in[x] += in[x] * inv_m;
                avg_out[x] += out[x] * inv_m;
            }
        }
        for (auto& s : stores) {
            std::copy(avg_in.begin(), avg_in.end(), s.in_row(row).begin());
            std::copy(avg_out.begin(), avg_out.end(), s.out_row(row).begin());
        }
        st.rows++;
    }
    st.bytes = st.rows * d * 8 * stores.size();
    return st;
}

// Test/reference mode: average every row across machines.
inline SyncStats sync_full(std::span<EmbeddingStore> stores) {
    if (stores.size() <= 1) return {};
    for (size_t i = 1; i < stores.size(); ++i)
        if (!stores[i].layout_matches(stores[0]))
            throw std::invalid_argument("sync requires identical store layouts");
    uint32_t n = stores[0].node_count, d = stores[0].d;
    double inv_m = 1.0 / static_cast<double>(stores.size());
    for (size_t e = 0; e < static_cast<size_t>(n) * d; ++e) {
        double ai = 0.0, ao = 0.0;
        for (auto& s : stores) {
            ai += s.phi_in[e] * inv_m;
            ao += s.phi_out[e] * inv_m;
        }
        for (auto& s : stores) {
            s.phi_in[e] = ai;
            s.phi_out[e] = ao;
        }
    }
    return {n, static_cast<uint64_t>(n) * d * 8 * stores.size()};
}

enum class SyncMode { every_n_batches, wall_clock };

struct TrainParams {
    uint32_t node_count = 0;   // 0 = derive from the corpus
    uint32_t d = 128;
    uint32_t window = 10;
    uint32_t negatives = 5;
    uint32_t window_count = 2; // walks trained per batch
    double lr_start = 0.025;
    double lr_min = 0.0001;
    SyncMode sync_mode = SyncMode::wall_clock;
    double sync_interval_sec = 0.1;
    uint64_t sync_every_batches = 64;
    bool full_sync = false; // test mode: sync whole matrices
    uint64_t seed = 1;
};

struct EpochLog {
    uint32_t epoch = 0;
    double loss = 0.0;
    double nodes_per_sec = 0.0;
    uint64_t synced_rows = 0;
    uint64_t bytes_synced = 0;
};

struct TrainResult {
    EmbeddingStore store;
    std::vector<EpochLog> log;
    uint64_t synced_rows = 0;
    uint64_t bytes_synced = 0;
};

namespace detail {

// A worker's contiguous share of one machine's walks, batched.
struct WorkerPlan {
    size_t begin = 0; // walk indices into the machine's slice
    size_t end = 0;
    size_t cursor = 0;
};

} // namespace detail

// Distributed training simulation: the corpus splits contiguously across
// logical machines, each machine trains its own matrix replica with
// `workers` threads (racy flushes within a machine are tolerated), and the
// machines meet at hotness syncs. Ends with one full averaging merge, so
// the returned store carries no machine divergence.
inline TrainResult train(const Corpus& corpus, uint32_t machines,
                         uint32_t workers, uint32_t epochs,
                         const TrainParams& params) {
    if (corpus.empty()) throw std::invalid_argument("corpus is empty");
    if (machines == 0 || workers == 0)
        throw std::invalid_argument("machines and workers must be >= 1");
    if (epochs == 0) throw std::invalid_argument("epochs must be >= 1");
    if (params.window_count == 0)
        throw std::invalid_argument("window_count must be >= 1");

    uint32_t node_count = params.node_count;
    if (node_count == 0) {
        for (const auto& walk : corpus)
            for (node_t v : walk) node_count = std::max(node_count, v + 1);
    }
    CorpusStats stats(node_count);
    for (const auto& walk : corpus) stats.add_walk(walk);

    EmbeddingStore init = build_store(stats, params.d, params.seed);
    NegativeTable neg_table(stats, init);
    std::vector<EmbeddingStore> stores(machines, init);

    uint64_t total_tokens = stats.total;
    uint64_t planned = total_tokens * epochs;
    std::atomic<uint64_t> processed{0};
    auto lr_at = [&](uint64_t done) {
        double frac = planned ? static_cast<double>(done) / planned : 1.0;
        return std::max(params.lr_min, params.lr_start * (1.0 - frac));
    };

    // Machine slices of the corpus, then worker slices of each machine.
    auto slice = [](size_t total, uint32_t parts, uint32_t k) {
        return std::pair<size_t, size_t>{total * k / parts,
                                         total * (k + 1) / parts};
    };

    TrainResult result;
    Rng sync_rng(mix64(params.seed, 0x56bc2));
    auto last_sync = std::chrono::steady_clock::now();
    uint64_t batches_since_sync = 0;

    for (uint32_t epoch = 0; epoch < epochs; ++epoch) {
        auto epoch_start = std::chrono::steady_clock::now();
        double epoch_nll = 0.0;
        uint64_t epoch_terms = 0;
        uint64_t epoch_nodes = 0;
        uint64_t epoch_synced_rows = 0, epoch_synced_bytes = 0;

        // Per machine, per worker: list of batch start indices.
        std::vector<std::vector<detail::WorkerPlan>> plans(machines);
        for (uint32_t m = 0; m < machines; ++m) {
            auto [mb, me] = slice(corpus.size(), machines, m);
            plans[m].resize(workers);
            for (uint32_t wk = 0; wk < workers; ++wk) {
                auto [wb, we] = slice(me - mb, workers, wk);
                plans[m][wk] = {mb + wb, mb + we, mb + wb};
            }
        }

        struct WorkerOut {
            double nll = 0.0;
            uint64_t terms = 0;
            uint64_t nodes = 0;
            uint64_t batches = 0;
        };

        // One slice: every worker of machine m advances a bounded number
        // of batches; the coordinator then gets a chance to sync.
        constexpr uint64_t kSliceBatches = 4;
        auto run_worker_slice = [&](uint32_t m, uint32_t wk, WorkerOut& out) {
            auto& plan = plans[m][wk];
            Rng rng(mix64(mix64(params.seed, epoch * 0x9e37 + m), wk));
            for (uint64_t b = 0; b < kSliceBatches && plan.cursor < plan.end; ++b) {
                size_t first = plan.cursor;
                size_t last = std::min(plan.end,
                                       first + params.window_count);
                plan.cursor = last;
                std::vector<std::span<const node_t>> batch;
                batch.reserve(last - first);
                for (size_t i = first; i < last; ++i)
                    batch.push_back(corpus[i]);
                double lr = lr_at(processed.load(std::memory_order_relaxed));
                WorkerBuffers buf;
                BatchStats bs = train_multiwindow(stores[m], buf, batch,
                                                  params.negatives, params.window,
                                                  lr, neg_table, rng);
                buf.flush(stores[m]);
                processed.fetch_add(bs.nodes, std::memory_order_relaxed);
                out.nll += bs.nll;
                out.terms += bs.terms;
                out.nodes += bs.nodes;
                out.batches++;
            }
        };

        bool work_left = true;
        while (work_left) {
            work_left = false;
            std::vector<WorkerOut> outs(static_cast<size_t>(machines) * workers);
            for (uint32_t m = 0; m < machines; ++m) {
                if (workers == 1) {
                    run_worker_slice(m, 0, outs[m]);
                } else {
                    std::vector<std::thread> threads;
                    threads.reserve(workers);
                    for (uint32_t wk = 0; wk < workers; ++wk)
                        threads.emplace_back(run_worker_slice, m, wk,
                                             std::ref(outs[m * workers + wk]));
                    for (auto& t : threads) t.join();
                }
            }
            for (auto& o : outs) {
                epoch_nll += o.nll;
                epoch_terms += o.terms;
                epoch_nodes += o.nodes;
                batches_since_sync += o.batches;
            }
            for (uint32_t m = 0; m < machines; ++m)
                for (auto& plan : plans[m])
                    if (plan.cursor < plan.end) work_left = true;

            if (machines > 1) {
                bool due;
                if (params.sync_mode == SyncMode::every_n_batches) {
                    due = batches_since_sync >= params.sync_every_batches;
                } else {
                    auto now = std::chrono::steady_clock::now();
                    due = std::chrono::duration<double>(now - last_sync).count() >=
                          params.sync_interval_sec;
                }
                if (due) {
                    SyncStats st = params.full_sync
                                       ? sync_full(stores)
                                       : sync_hotness(stores, sync_rng);
                    epoch_synced_rows += st.rows;
                    epoch_synced_bytes += st.bytes;
                    batches_since_sync = 0;
                    last_sync = std::chrono::steady_clock::now();
                }
            }
        }

        auto epoch_end = std::chrono::steady_clock::now();
        double secs = std::chrono::duration<double>(epoch_end - epoch_start).count();
        EpochLog log;
        log.epoch = epoch;
        log.loss = epoch_terms ? epoch_nll / static_cast<double>(epoch_terms) : 0.0;
        log.nodes_per_sec = secs > 0.0 ? static_cast<double>(epoch_nodes) / secs : 0.0;
        log.synced_rows = epoch_synced_rows;
        log.bytes_synced = epoch_synced_bytes;
        result.log.push_back(log);
        result.synced_rows += epoch_synced_rows;
        result.bytes_synced += epoch_synced_bytes;
    }

    // Final merge: average all replicas into one exported store.
    if (machines > 1) sync_full(stores);
    result.store = std::move(stores[0]);
    return result;
}

// Text export: header "node_count d", then "node_id v1 ... vd" per node.
inline void write_embeddings_text(const EmbeddingStore& store,
                                  const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write embeddings: " + path);
    out.precision(17);
    out << store.node_count << ' ' << store.d << '\n';
    for (node_t v = 0; v < store.node_count; ++v) {
        out << v;
        auto row = store.in_row(store.row_of(v));
        for (double x : row) out << ' ' << x;
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("short write to embeddings: " + path);
}

// Node-indexed embedding matrix as read back from disk.
struct Embeddings {
    uint32_t node_count = 0;
    uint32_t d = 0;
    std::vector<double> vecs; // [node_count x d], node-indexed

    std::span<const double> row(node_t v) const {
        if (v >= node_count)
            throw std::out_of_range("embedding row out of range");
        return {vecs.data() + static_cast<size_t>(v) * d, d};
    }
};

inline Embeddings embeddings_from_store(const EmbeddingStore& store) {
    Embeddings e;
    e.node_count = store.node_count;
    e.d = store.d;
    e.vecs.resize(static_cast<size_t>(e.node_count) * e.d);
    for (node_t v = 0; v < store.node_count; ++v) {
        auto row = store.in_row(store.row_of(v));
        std::copy(row.begin(), row.end(),
                  e.vecs.begin() + static_cast<size_t>(v) * e.d);
    }
    return e;
}

inline Embeddings read_embeddings_text(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open embeddings: " + path);
    Embeddings e;
    if (!(in >> e.node_count >> e.d))
        throw std::runtime_error("bad embeddings header in " + path);
    e.vecs.assign(static_cast<size_t>(e.node_count) * e.d, 0.0);
    std::vector<bool> seen(e.node_count, false);
    for (uint32_t i = 0; i < e.node_count; ++i) {
        uint32_t v;
        if (!(in >> v) || v >= e.node_count)
            throw std::runtime_error("bad embeddings row in " + path);
        if (seen[v])
            throw std::runtime_error("duplicate embedding row in " + path);
        seen[v] = true;
        for (uint32_t x = 0; x < e.d; ++x)
            if (!(in >> e.vecs[static_cast<size_t>(v) * e.d + x]))
                throw std::runtime_error("truncated embeddings in " + path);
    }
    return e;
}

inline void write_train_log(std::span<const EpochLog> log, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write training log: " + path);
    out << "epoch,loss,nodes_per_sec,synced_rows,bytes_synced\n";
    out.precision(10);
    for (const auto& row : log)
        out << row.epoch << ',' << row.loss << ',' << row.nodes_per_sec << ','
            << row.synced_rows << ',' << row.bytes_synced << '\n';
    if (!out)
        throw std::runtime_error("short write to training log: " + path);
}

} // namespace infowalk
