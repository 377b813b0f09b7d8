#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cstdint>
#include <deque>
#include <fstream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "csr_graph.hpp"
#include "rng.hpp"

namespace infowalk {

struct PartitionAssignment {
    std::vector<uint32_t> owner; // node -> machine
    std::vector<uint64_t> sizes; // machine -> node count
    uint32_t m = 1;
    double gamma = 2.0;
};

enum class StreamOrder { random, bfs_degree, dfs_degree };

inline StreamOrder parse_stream_order(const std::string& s) {
    if (s == "random") return StreamOrder::random;
    if (s == "bfs-degree") return StreamOrder::bfs_degree;
    if (s == "dfs-degree") return StreamOrder::dfs_degree;
    throw std::invalid_argument("unknown stream order: " + s);
}

inline const char* stream_order_name(StreamOrder o) {
    switch (o) {
        case StreamOrder::random: return "random";
        case StreamOrder::bfs_degree: return "bfs-degree";
        case StreamOrder::dfs_degree: return "dfs-degree";
    }
    return "?";
}

// Load penalty for growing partition i: 1 - |P_i| / (gamma * avg size).
// Positive while under the slack, negative beyond it. Before anything is
// assigned the average is undefined; every partition counts as fully open.
inline double balance_factor(std::span<const uint64_t> sizes, uint32_t i,
                             double gamma) {
    assert(i < sizes.size());
    uint64_t total = 0;
    for (uint64_t s : sizes) total += s;
    if (total == 0) return 1.0;
    double avg = static_cast<double>(total) / static_cast<double>(sizes.size());
    return 1.0 - static_cast<double>(sizes[i]) / (gamma * avg);
}

// Emits every node once. random shuffles with the seed; the traversal
// orders walk each component from its highest-degree unvisited node,
// expanding highest-degree neighbors first (ties toward lower ids).
inline std::vector<node_t> make_stream_order(const CsrGraph& g, StreamOrder order,
                                             uint64_t seed) {
    node_t n = g.node_count();
    std::vector<node_t> out;
    out.reserve(n);

    if (order == StreamOrder::random) {
        out.resize(n);
        for (node_t v = 0; v < n; ++v) out[v] = v;
        Rng rng(mix64(seed, 0x5eedc0de));
        for (node_t i = n; i > 1; --i) {
            node_t j = static_cast<node_t>(rng.next_below(i));
            std::swap(out[i - 1], out[j]);
        }
        return out;
    }

    auto deg_before = [&](node_t a, node_t b) {
        // degree descending, then id ascending
        if (g.degree(a) != g.degree(b)) return g.degree(a) > g.degree(b);
        return a < b;
    };
    std::vector<node_t> roots(n);
    for (node_t v = 0; v < n; ++v) roots[v] = v;
    std::sort(roots.begin(), roots.end(), deg_before);

    std::vector<bool> seen(n, false);
    std::vector<node_t> work; // scratch for sorting a node's frontier

    if (order == StreamOrder::bfs_degree) {
        std::deque<node_t> queue;
        for (node_t root : roots) {
            if (seen[root]) continue;
            seen[root] = true;
            queue.push_back(root);
            while (!queue.empty()) {
                node_t u = queue.front();
                queue.pop_front();
                out.push_back(u);
                work.clear();
                for (node_t v : g.neighbors(u))
                    if (!seen[v]) work.push_back(v);
                std::sort(work.begin(), work.end(), deg_before);
                for (node_t v : work) {
                    if (seen[v]) continue; // duplicates within the frontier
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
    } else {
        std::vector<node_t> stack;
        for (node_t root : roots) {
            if (seen[root]) continue;
            stack.push_back(root);
            while (!stack.empty()) {
                node_t u = stack.back();
                stack.pop_back();
                if (seen[u]) continue;
                seen[u] = true;
                out.push_back(u);
                work.clear();
                for (node_t v : g.neighbors(u))
                    if (!seen[v]) work.push_back(v);
                // Push lowest-priority first so the best neighbor pops next.
                std::sort(work.begin(), work.end(), deg_before);
                for (auto it = work.rbegin(); it != work.rend(); ++it)
                    stack.push_back(*it);
            }
        }
    }
    return out;
}

// Streaming partitioner state. Each partition keeps its member ids as a
// sorted array plus a small unsorted tail, merged periodically, so scoring
// a node against a partition can gallop N(v) over the member list instead
// of hashing every neighbor.
class PartitionBuilder {
public:
    PartitionBuilder(const CsrGraph& g, uint32_t m, double gamma)
        : g_(g), m_(m), gamma_(gamma), sizes_(m, 0),
          owner_(g.node_count(), kUnassigned), sorted_(m), pending_(m) {
        if (m == 0) throw std::invalid_argument("partition count must be >= 1");
        if (gamma < 1.0) throw std::invalid_argument("gamma must be >= 1");
    }

    // Neighbors of v already placed in partition i.
    std::vector<node_t> members_in_neighborhood(node_t v, uint32_t i) const {
        auto nbrs = g_.neighbors(v);
        std::vector<node_t> matches =
            intersect_galloping(nbrs, {sorted_[i].data(), sorted_[i].size()});
        for (node_t u : pending_[i])
            if (std::binary_search(nbrs.begin(), nbrs.end(), u)) matches.push_back(u);
        return matches;
    }

    // First-order proximity: how many of v's neighbors (their weight sum,
    // when weighted) the partition already holds.
    double proximity_first(node_t v, uint32_t i) const {
        auto matches = members_in_neighborhood(v, i);
        if (!g_.weighted()) return static_cast<double>(matches.size());
        double s = 0.0;
        for (node_t u : matches) s += g_.weight(v, u);
        return s;
    }

    // Second-order proximity: shared-neighbor mass between v and the
    // partition members it can actually reach — only members adjacent to v
    // count, since a walk from v cannot jump to a non-neighbor.
    double proximity_second(node_t v, uint32_t i) const {
        auto matches = members_in_neighborhood(v, i);
        double s = 0.0;
        for (node_t u : matches) {
            double shared =
                static_cast<double>(intersect_count(g_.neighbors(v), g_.neighbors(u)));
            s += g_.weighted() ? g_.weight(v, u) * shared : shared;
        }
        return s;
    }

    double balance(uint32_t i) const { return balance_factor(sizes_, i, gamma_); }

    // Places v into argmax_i (PS1 + PS2) * tau(P_i). Ties — including the
    // all-zero cold case — fall to the least-loaded partition, then the
    // lowest index. Sizes update immediately so the next node sees them.
    uint32_t assign_node(node_t v) {
        assert(v < owner_.size() && owner_[v] == kUnassigned);
        uint32_t best = 0;
        double best_score = 0.0;
        bool have = false;
        for (uint32_t i = 0; i < m_; ++i) {
            double score =
                (proximity_first(v, i) + proximity_second(v, i)) * balance(i);
            bool better = !have || score > best_score ||
                          (score == best_score &&
                           (sizes_[i] < sizes_[best] ||
                            (sizes_[i] == sizes_[best] && i < best)));
            if (better) {
                best = i;
                best_score = score;
                have = true;
            }
        }
        place(v, best);
        return best;
    }

    // Records an externally-decided placement (used by the hash baseline).
    void place(node_t v, uint32_t i) {
        assert(i < m_ && owner_[v] == kUnassigned);
        owner_[v] = i;
        sizes_[i]++;
        total_++;
        pending_[i].push_back(v);
        if (pending_[i].size() >= kPendingMax) merge_pending(i);
    }

    PartitionAssignment finish() {
        for (uint32_t o : owner_)
            if (o == kUnassigned)
                throw std::logic_error("partitioning left a node unassigned");
        PartitionAssignment a;
        a.owner = owner_;
        a.sizes = sizes_;
        a.m = m_;
        a.gamma = gamma_;
        return a;
    }

    const std::vector<uint64_t>& sizes() const { return sizes_; }
    const std::vector<uint32_t>& owner() const { return owner_; }

private:
    static constexpr uint32_t kUnassigned = std::numeric_limits<uint32_t>::max();
    static constexpr size_t kPendingMax = 64;

    void merge_pending(uint32_t i) {
        auto& s = sorted_[i];
        auto& p = pending_[i];
        s.insert(s.end(), p.begin(), p.end());
        std::sort(s.begin(), s.end());
        p.clear();
    }

    const CsrGraph& g_;
    uint32_t m_;
    double gamma_;
    std::vector<uint64_t> sizes_;
    std::vector<uint32_t> owner_;
    std::vector<std::vector<node_t>> sorted_;
    std::vector<std::vector<node_t>> pending_;
    uint64_t total_ = 0;
};

inline PartitionAssignment partition_stream(const CsrGraph& g, uint32_t m,
                                            double gamma, StreamOrder order,
                                            uint64_t seed) {
    PartitionBuilder b(g, m, gamma);
    for (node_t v : make_stream_order(g, order, seed)) b.assign_node(v);
    return b.finish();
}

// Splits the stream into contiguous segments partitioned independently —
// each against its own fresh size counters, blind to the other segments —
// then merges by summing. Balance holds per segment, so globally within
// the same slack up to segment-boundary effects.
inline PartitionAssignment partition_parallel(const CsrGraph& g, uint32_t m,
                                              double gamma, uint32_t segments,
                                              StreamOrder order, uint64_t seed) {
    if (segments == 0) throw std::invalid_argument("segments must be >= 1");
    std::vector<node_t> stream = make_stream_order(g, order, seed);
    segments = std::min<uint32_t>(segments, std::max<size_t>(stream.size(), 1));

    std::vector<PartitionBuilder> builders;
    builders.reserve(segments);
    for (uint32_t s = 0; s < segments; ++s) builders.emplace_back(g, m, gamma);

    auto run_segment = [&](uint32_t s) {
        size_t lo = stream.size() * s / segments;
        size_t hi = stream.size() * (s + 1) / segments;
        for (size_t k = lo; k < hi; ++k) builders[s].assign_node(stream[k]);
    };
    if (segments == 1) {
        run_segment(0);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(segments);
        for (uint32_t s = 0; s < segments; ++s)
            threads.emplace_back(run_segment, s);
        for (auto& t : threads) t.join();
    }

    PartitionAssignment a;
    a.owner.assign(g.node_count(), 0);
    a.sizes.assign(m, 0);
    a.m = m;
    a.gamma = gamma;
    for (uint32_t s = 0; s < segments; ++s) {
        size_t lo = stream.size() * s / segments;
        size_t hi = stream.size() * (s + 1) / segments;
        for (size_t k = lo; k < hi; ++k)
            a.owner[stream[k]] = builders[s].owner()[stream[k]];
        for (uint32_t i = 0; i < m; ++i) a.sizes[i] += builders[s].sizes()[i];
    }
    return a;
}

// Trivial balanced baseline: node i -> i mod m.
inline PartitionAssignment partition_hash(const CsrGraph& g, uint32_t m) {
    if (m == 0) throw std::invalid_argument("partition count must be >= 1");
    PartitionAssignment a;
    a.m = m;
    a.gamma = 1.0;
    a.owner.resize(g.node_count());
    a.sizes.assign(m, 0);
    for (node_t v = 0; v < g.node_count(); ++v) {
        a.owner[v] = v % m;
        a.sizes[v % m]++;
    }
    return a;
}

// Edges whose endpoints land on different machines. Undirected edges are
// stored in both directions; count each once.
inline uint64_t edge_cut(const CsrGraph& g, std::span<const uint32_t> owner) {
    uint64_t cut = 0;
    for (node_t u = 0; u < g.node_count(); ++u)
        for (node_t v : g.neighbors(u)) {
            if (!g.directed() && v < u) continue;
            if (owner[u] != owner[v]) cut++;
        }
    return cut;
}

inline void write_partition(const PartitionAssignment& a, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write partition file: " + path);
    for (size_t v = 0; v < a.owner.size(); ++v)
        out << v << ' ' << a.owner[v] << '\n';
    if (!out)
        throw std::runtime_error("short write to partition file: " + path);
}

inline PartitionAssignment read_partition(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open partition file: " + path);
    std::vector<uint32_t> owner;
    std::vector<bool> seen;
    std::string line;
    size_t line_no = 0;
    uint32_t max_machine = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const char* p = line.data();
        const char* end = p + line.size();
        auto skip_ws = [&] { while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p; };
        skip_ws();
        if (p == end || *p == '#') continue;
        uint64_t vals[2];
        for (int k = 0; k < 2; ++k) {
            auto [q, ec] = std::from_chars(p, end, vals[k]);
            if (ec != std::errc())
                throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                         ": expected \"node machine\"");
            p = q;
            skip_ws();
        }
        size_t v = vals[0];
        if (owner.size() <= v) {
            owner.resize(v + 1, 0);
            seen.resize(v + 1, false);
        }
        if (seen[v])
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": node assigned twice");
        seen[v] = true;
        owner[v] = static_cast<uint32_t>(vals[1]);
        max_machine = std::max(max_machine, owner[v]);
    }
    for (size_t v = 0; v < seen.size(); ++v)
        if (!seen[v])
            throw std::runtime_error(path + ": node " + std::to_string(v) +
                                     " has no assignment");
    PartitionAssignment a;
    a.m = max_machine + 1;
    a.owner = std::move(owner);
    a.sizes.assign(a.m, 0);
    for (uint32_t o : a.owner) a.sizes[o]++;
    return a;
}

} // namespace infowalk
