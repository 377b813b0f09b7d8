#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "csr_graph.hpp"

namespace infowalk {

// x * log2(x), continuously extended to 0 at x = 0.
inline double xlog2x(double x) {
    return x > 0.0 ? x * std::log2(x) : 0.0;
}

// Shannon entropy (bits) of a visit-count multiset; total is implied.
inline double entropy_of_counts(std::span<const uint64_t> counts) {
    uint64_t total = 0;
    for (uint64_t c : counts) total += c;
    if (total == 0) return 0.0;
    double h = 0.0;
    for (uint64_t c : counts) {
        if (c == 0) continue;
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= xlog2x(p);
    }
    return h;
}

// Entropy after appending one more node to a walk, computed from the old
// entropy alone: h' = (h*L - log2_t) / (L+1) where log2_t collects the
// terms that change. prev_count is how often the appended node already
// appeared in the walk (0 if new); for prev_count = 0 the correction
// term vanishes. O(1) per step, no walk storage needed.
inline double entropy_step(double h, uint64_t len, uint64_t prev_count) {
    assert(len >= 1);
    double l = static_cast<double>(len);
    double n = static_cast<double>(prev_count);
    double log2_t = l * std::log2(l) - (l + 1.0) * std::log2(l + 1.0) +
                    (xlog2x(n + 1.0) - xlog2x(n));
    return (h * l - log2_t) / (l + 1.0);
}

// Running statistics a walker drags along: current visit entropy, walk
// length, and the five raw moments needed to correlate entropy against
// length. Every field is one machine word, so shipping a walker across
// a machine boundary costs the same regardless of how far it has walked.
struct WalkInfoState {
    double h = 0.0;   // entropy of the visit distribution so far
    uint64_t len = 0; // nodes visited so far; also the sample count below
    double e_h = 0.0; // running means over the (entropy, length) series
    double e_l = 0.0;
    double e_hl = 0.0;
    double e_h2 = 0.0;
    double e_l2 = 0.0;

    // Folds the current (h, len) point into the running means:
    // E_p(X) = ((p-1)/p) * E_{p-1}(X) + X_p / p. The length series is
    // deterministic (1..L), so its means collapse to closed forms; using
    // them keeps e_l == (L+1)/2 bit-exact instead of drifting by an ulp
    // per step through the recurrence.
    void update_correlation_means() {
        double p = static_cast<double>(len);
        double l = static_cast<double>(len);
        double w_old = (p - 1.0) / p;
        e_h = w_old * e_h + h / p;
        e_l = (l + 1.0) / 2.0;
        e_hl = w_old * e_hl + (h * l) / p;
        e_h2 = w_old * e_h2 + (h * h) / p;
        e_l2 = (l + 1.0) * (2.0 * l + 1.0) / 6.0;
    }

    // Registers a visit. prev_count is the node's visit count in this walk
    // before this step (0 when first seen). Updates entropy in O(1) and
    // absorbs the new point into the correlation means.
    void visit(uint64_t prev_count) {
        if (len == 0) {
            h = 0.0;
            len = 1;
        } else {
            h = entropy_step(h, len, prev_count);
            ++len;
        }
        update_correlation_means();
    }

    // Squared Pearson correlation between entropy and length, clamped to
    // [0, 1]. Empty when fewer than two samples exist or a variance has
    // collapsed (entropy flat => nothing left to correlate).
    std::optional<double> r_squared() const {
        if (len < 2) return std::nullopt;
        double cov = e_hl - e_h * e_l;
        double var_h = e_h2 - e_h * e_h;
        double var_l = e_l2 - e_l * e_l;
        constexpr double kVarFloor = 1e-15;
        if (var_h <= kVarFloor || var_l <= kVarFloor) return std::nullopt;
        double r2 = (cov * cov) / (var_h * var_l);
        return std::min(1.0, std::max(0.0, r2));
    }

    // Walk stops when entropy growth decouples from length: correlation
    // below mu after a min-length warm-up, or hard cap hit. A degenerate
    // correlation (flat entropy so far) is not evidence of convergence,
    // so it never stops the walk before the cap.
    bool should_terminate(double mu, uint64_t min_len, uint64_t max_len) const {
        if (len >= max_len) return true;
        if (len < min_len || len < 2) return false;
        auto r2 = r_squared();
        if (!r2) return false;
        return *r2 < mu;
    }
};

// Per-node occurrence counts accumulated over a walk corpus.
struct CorpusStats {
    std::vector<uint64_t> occurrences;
    uint64_t total = 0;

    explicit CorpusStats(size_t node_count = 0) : occurrences(node_count, 0) {}

    void add_visit(node_t v) {
        if (v >= occurrences.size()) occurrences.resize(v + 1, 0);
        occurrences[v]++;
        total++;
    }

    void add_walk(std::span<const node_t> walk) {
        for (node_t v : walk) add_visit(v);
    }
};

// KL divergence D(p || q) in bits between the degree distribution p and
// the corpus visit distribution q, over nodes of positive degree. Unvisited
// positive-degree nodes get a floor count of one so q stays positive; q is
// normalized over the same floored counts.
inline double relative_entropy(std::span<const uint64_t> degrees,
                               std::span<const uint64_t> occurrences) {
    if (degrees.size() != occurrences.size())
        throw std::invalid_argument("relative_entropy: size mismatch");
    long double deg_total = 0.0L, occ_total = 0.0L;
    for (size_t v = 0; v < degrees.size(); ++v) {
        if (degrees[v] == 0) continue;
        deg_total += static_cast<long double>(degrees[v]);
        occ_total += static_cast<long double>(std::max<uint64_t>(occurrences[v], 1));
    }
    if (deg_total == 0.0L)
        throw std::invalid_argument("relative_entropy: graph has no edges");
    long double d = 0.0L;
    for (size_t v = 0; v < degrees.size(); ++v) {
        if (degrees[v] == 0) continue;
        long double p = static_cast<long double>(degrees[v]) / deg_total;
        long double q =
            static_cast<long double>(std::max<uint64_t>(occurrences[v], 1)) / occ_total;
        d += p * std::log2(p / q);
    }
    return static_cast<double>(d);
}

inline double relative_entropy(const CsrGraph& g, const CorpusStats& stats) {
    std::vector<uint64_t> degrees(g.node_count());
    for (node_t v = 0; v < g.node_count(); ++v) degrees[v] = g.degree(v);
    std::vector<uint64_t> occ(g.node_count(), 0);
    size_t n = std::min<size_t>(occ.size(), stats.occurrences.size());
    for (size_t v = 0; v < n; ++v) occ[v] = stats.occurrences[v];
    return relative_entropy(degrees, occ);
}

// Round-over-round stopping rule for walk generation: another round of
// walks changed the corpus-vs-degree divergence by no more than delta.
inline bool walks_converged(double prev_divergence, double cur_divergence,
                            double delta) {
    return std::abs(prev_divergence - cur_divergence) <= delta;
}

} // namespace infowalk
