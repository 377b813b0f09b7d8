#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "csr_graph.hpp"
#include "learner.hpp"
#include "rng.hpp"
#include "sampler.hpp"

namespace infowalk {

using EdgePair = std::pair<node_t, node_t>;

// Held-out link-prediction split: a fraction of edges removed as positive
// test pairs, an equal number of sampled non-edges as negatives, and the
// graph rebuilt from what remains for training.
struct LinkSplit {
    CsrGraph train_graph;
    std::vector<EdgePair> pos_test;
    std::vector<EdgePair> neg_test;
    uint64_t split_seed = 0;
};

// Removes floor(fraction * E) edges uniformly at random (self-loops always
// stay in the train graph), then samples as many distinct non-edges of the
// ORIGINAL graph as negatives. Undirected graphs treat (u,v) and (v,u) as
// one edge; directed splits respect direction.
inline LinkSplit split_edges(const CsrGraph& g, double fraction, uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw std::invalid_argument("split fraction must be in (0, 1)");

    struct Removable {
        node_t u, v;
        double w;
    };
    std::vector<Removable> candidates;
    std::vector<EdgeTriple> loops; // never removed
    for (node_t u = 0; u < g.node_count(); ++u) {
        auto nbrs = g.neighbors(u);
        for (size_t i = 0; i < nbrs.size(); ++i) {
            node_t v = nbrs[i];
            double w = g.weighted() ? g.edge_weights(u)[i] : 1.0;
            if (u == v) {
                loops.push_back({u, v, w});
                continue;
            }
            if (!g.directed() && v < u) continue; // one record per edge
            candidates.push_back({u, v, w});
        }
    }

    Rng rng(mix64(seed, 0x5317ed6e5));
    for (size_t i = candidates.size(); i > 1; --i)
        std::swap(candidates[i - 1], candidates[rng.next_below(i)]);

    size_t removed =
        static_cast<size_t>(fraction * static_cast<double>(candidates.size()));

    LinkSplit split;
    split.split_seed = seed;
    std::vector<EdgeTriple> kept = loops;
    for (size_t i = 0; i < candidates.size(); ++i) {
        if (i < removed)
            split.pos_test.push_back({candidates[i].u, candidates[i].v});
        else
            kept.push_back({candidates[i].u, candidates[i].v, candidates[i].w});
    }
    split.train_graph =
        build_csr(std::move(kept), g.directed(), g.weighted(), g.node_count());

    // Negatives: uniform node pairs that are non-edges of the original
    // graph. Bounded retries guard against graphs too dense to supply them.
    auto pack = [&](node_t a, node_t b) {
        if (!g.directed() && a > b) std::swap(a, b);
        return (static_cast<uint64_t>(a) << 32) | b;
    };
    std::unordered_set<uint64_t> taken;
    uint64_t attempts = 0;
    const uint64_t max_attempts = 200 * static_cast<uint64_t>(removed) + 1000;
    while (split.neg_test.size() < split.pos_test.size()) {
        if (++attempts > max_attempts)
            throw std::runtime_error(
                "could not sample enough non-edges; graph too dense");
        node_t a = static_cast<node_t>(rng.next_below(g.node_count()));
        node_t b = static_cast<node_t>(rng.next_below(g.node_count()));
        if (a == b || g.has_edge(a, b)) continue;
        if (!taken.insert(pack(a, b)).second) continue;
        if (!g.directed() && a > b) std::swap(a, b);
        split.neg_test.push_back({a, b});
    }
    return split;
}

// Mann-Whitney AUC from raw scores: P(pos > neg) + 0.5 * P(tie), computed
// with midranks so ties are exact.
inline double auc_from_scores(std::span<const double> pos,
                              std::span<const double> neg) {
    if (pos.empty() || neg.empty())
        throw std::invalid_argument("auc needs both positive and negative scores");
    struct Item {
        double s;
        bool is_pos;
    };
    std::vector<Item> items;
    items.reserve(pos.size() + neg.size());
    for (double s : pos) items.push_back({s, true});
    for (double s : neg) items.push_back({s, false});
    std::sort(items.begin(), items.end(),
              [](const Item& a, const Item& b) { return a.s < b.s; });

    double rank_sum_pos = 0.0;
    size_t i = 0;
    while (i < items.size()) {
        size_t j = i;
        while (j < items.size() && items[j].s == items[i].s) ++j;
        double midrank = 0.5 * static_cast<double>(i + 1 + j); // 1-based average
        for (size_t t = i; t < j; ++t)
            if (items[t].is_pos) rank_sum_pos += midrank;
        i = j;
    }
    double np = static_cast<double>(pos.size());
    double nn = static_cast<double>(neg.size());
    double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * nn);
}

namespace detail {

inline double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

} // namespace detail

// Similarity of a pair is the dot product of the nodes' input vectors; the
// averaged variant mixes in the output matrix for both endpoints.
inline double auc_score(const EmbeddingStore& store, const LinkSplit& split,
                        bool average_matrices = false) {
    auto vec = [&](node_t v) {
        uint32_t r = store.row_of(v);
        std::vector<double> out(store.d);
        auto in = store.in_row(r);
        std::copy(in.begin(), in.end(), out.begin());
        if (average_matrices) {
            auto o = store.out_row(r);
            for (uint32_t x = 0; x < store.d; ++x)
                out[x] = 0.5 * (out[x] + o[x]);
        }
        return out;
    };
    std::vector<double> pos, neg;
    pos.reserve(split.pos_test.size());
    neg.reserve(split.neg_test.size());
    for (auto& [u, v] : split.pos_test) pos.push_back(detail::dot(vec(u), vec(v)));
    for (auto& [u, v] : split.neg_test) neg.push_back(detail::dot(vec(u), vec(v)));
    return auc_from_scores(pos, neg);
}

inline double auc_score(const Embeddings& emb, const LinkSplit& split) {
    std::vector<double> pos, neg;
    pos.reserve(split.pos_test.size());
    neg.reserve(split.neg_test.size());
    for (auto& [u, v] : split.pos_test)
        pos.push_back(detail::dot(emb.row(u), emb.row(v)));
    for (auto& [u, v] : split.neg_test)
        neg.push_back(detail::dot(emb.row(u), emb.row(v)));
    return auc_from_scores(pos, neg);
}

struct TrialResult {
    uint32_t trial = 0;
    uint64_t seed = 0;
    double auc = 0.0;
};

struct EvalSummary {
    std::vector<TrialResult> trials;
    double mean = 0.0;
    double stddev = 0.0;
};

// Repeats split -> embed -> score with independent per-trial seeds and
// aggregates. The embedder is injected so callers decide how embeddings
// are produced for each trial's train graph.
inline EvalSummary repeat_eval(
    const CsrGraph& g, double fraction, uint32_t trials, uint64_t seed,
    const std::function<Embeddings(const CsrGraph& train_graph, uint64_t trial_seed)>&
        embed) {
    if (trials == 0) throw std::invalid_argument("trials must be >= 1");
    EvalSummary summary;
    summary.trials.reserve(trials);
    for (uint32_t t = 0; t < trials; ++t) {
        uint64_t trial_seed = mix64(seed, 0xe7a1 + t);
        LinkSplit split = split_edges(g, fraction, trial_seed);
        Embeddings emb = embed(split.train_graph, trial_seed);
        summary.trials.push_back({t, trial_seed, auc_score(emb, split)});
    }
    double sum = 0.0;
    for (auto& tr : summary.trials) sum += tr.auc;
    summary.mean = sum / static_cast<double>(trials);
    double var = 0.0;
    for (auto& tr : summary.trials) {
        double dlt = tr.auc - summary.mean;
        var += dlt * dlt;
    }
    summary.stddev =
        trials > 1 ? std::sqrt(var / static_cast<double>(trials - 1)) : 0.0;
    return summary;
}

inline void write_eval_csv(const EvalSummary& summary, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write eval results: " + path);
    out.precision(10);
    out << "trial,seed,auc\n";
    for (const auto& t : summary.trials)
        out << t.trial << ',' << t.seed << ',' << t.auc << '\n';
    out << "summary,mean," << summary.mean << '\n';
    out << "summary,stddev," << summary.stddev << '\n';
    if (!out)
        throw std::runtime_error("short write to eval results: " + path);
}

struct CorpusSummary {
    uint64_t walks = 0;
    uint64_t tokens = 0;
    uint64_t min_len = 0;
    uint64_t max_len = 0;
    double mean_len = 0.0;
};

inline CorpusSummary summarize_corpus(const Corpus& corpus) {
    CorpusSummary s;
    s.walks = corpus.size();
    for (const auto& walk : corpus) {
        s.tokens += walk.size();
        if (s.min_len == 0 || walk.size() < s.min_len) s.min_len = walk.size();
        s.max_len = std::max<uint64_t>(s.max_len, walk.size());
    }
    s.mean_len = s.walks ? static_cast<double>(s.tokens) / s.walks : 0.0;
    return s;
}

} // namespace infowalk
