#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

namespace infowalk {

using node_t = uint32_t;
using edge_index_t = uint64_t;

// Immutable compressed-sparse-row graph. Adjacency slices are strictly
// sorted ascending with duplicate edges collapsed at build time, so
// degree/neighbor lookups and galloping intersections are all O(log)-cheap.
// Undirected edges are stored twice, once per endpoint slice.
// Safe for unsynchronized concurrent reads once built.
class CsrGraph {
public:
    CsrGraph() : offsets_(1, 0) {}

    CsrGraph(node_t node_count, std::vector<edge_index_t> offsets,
             std::vector<node_t> neighbors, std::vector<double> weights,
             bool directed)
        : node_count_(node_count),
          offsets_(std::move(offsets)),
          neighbors_(std::move(neighbors)),
          weights_(std::move(weights)),
          directed_(directed) {
        validate();
    }

    node_t node_count() const { return node_count_; }
    edge_index_t edge_count() const { return neighbors_.size(); }
    bool directed() const { return directed_; }
    bool weighted() const { return !weights_.empty(); }

    node_t degree(node_t u) const {
        assert(u < node_count_);
        return static_cast<node_t>(offsets_[u + 1] - offsets_[u]);
    }

    std::span<const node_t> neighbors(node_t u) const {
        assert(u < node_count_);
        return {neighbors_.data() + offsets_[u],
                neighbors_.data() + offsets_[u + 1]};
    }

    std::span<const double> edge_weights(node_t u) const {
        assert(u < node_count_ && weighted());
        return {weights_.data() + offsets_[u], weights_.data() + offsets_[u + 1]};
    }

    bool has_edge(node_t u, node_t v) const {
        auto adj = neighbors(u);
        return std::binary_search(adj.begin(), adj.end(), v);
    }

    // Weight of edge (u,v); 1.0 when the graph is unweighted.
    double weight(node_t u, node_t v) const {
        auto adj = neighbors(u);
        auto it = std::lower_bound(adj.begin(), adj.end(), v);
        if (it == adj.end() || *it != v)
            throw std::out_of_range("weight: no edge " + std::to_string(u) +
                                    "->" + std::to_string(v));
        if (!weighted()) return 1.0;
        return weights_[offsets_[u] + (it - adj.begin())];
    }

    const std::vector<edge_index_t>& offsets() const { return offsets_; }
    const std::vector<node_t>& neighbor_array() const { return neighbors_; }
    const std::vector<double>& weight_array() const { return weights_; }

    bool operator==(const CsrGraph& o) const {
        return node_count_ == o.node_count_ && offsets_ == o.offsets_ &&
               neighbors_ == o.neighbors_ && weights_ == o.weights_ &&
               directed_ == o.directed_;
    }

private:
    void validate() const {
        if (offsets_.size() != static_cast<size_t>(node_count_) + 1)
            throw std::invalid_argument("csr: offsets size mismatch");
        if (offsets_.front() != 0 || offsets_.back() != neighbors_.size())
            throw std::invalid_argument("csr: offsets endpoints invalid");
        for (size_t i = 0; i + 1 < offsets_.size(); ++i)
            if (offsets_[i] > offsets_[i + 1])
                throw std::invalid_argument("csr: offsets not non-decreasing");
        for (node_t u = 0; u < node_count_; ++u)
            for (edge_index_t e = offsets_[u]; e + 1 < offsets_[u + 1]; ++e)
                if (neighbors_[e] >= neighbors_[e + 1])
                    throw std::invalid_argument("csr: adjacency not strictly sorted");
        for (node_t v : neighbors_)
            if (v >= node_count_)
                throw std::invalid_argument("csr: neighbor id out of range");
        if (!weights_.empty()) {
            if (weights_.size() != neighbors_.size())
                throw std::invalid_argument("csr: weights size mismatch");
            for (double w : weights_)
                if (!(w > 0.0))
                    throw std::invalid_argument("csr: non-positive weight");
        }
    }

    node_t node_count_ = 0;
    std::vector<edge_index_t> offsets_;
    std::vector<node_t> neighbors_;
    std::vector<double> weights_;
    bool directed_ = false;
};

struct EdgeTriple {
    node_t src;
    node_t dst;
    double w;
};

// Builds a CsrGraph from raw edges. Undirected inputs get their reverse
// edges added; duplicates collapse (weights summed in weighted mode);
// self-loops are kept, stored once.
inline CsrGraph build_csr(std::vector<EdgeTriple> edges, bool directed,
                          bool weighted, node_t min_node_count = 0) {
    node_t n = min_node_count;
    for (const auto& e : edges) {
        n = std::max(n, e.src + 1);
        n = std::max(n, e.dst + 1);
    }
    if (!directed) {
        size_t original = edges.size();
        edges.reserve(original * 2);
        for (size_t i = 0; i < original; ++i)
            if (edges[i].src != edges[i].dst)
                edges.push_back({edges[i].dst, edges[i].src, edges[i].w});
    }
    std::sort(edges.begin(), edges.end(), [](const EdgeTriple& a, const EdgeTriple& b) {
        return std::tie(a.src, a.dst) < std::tie(b.src, b.dst);
    });
    // Collapse duplicates, summing weights.
    size_t out = 0;
    for (size_t i = 0; i < edges.size(); ++i) {
        if (out > 0 && edges[out - 1].src == edges[i].src &&
            edges[out - 1].dst == edges[i].dst) {
            edges[out - 1].w += edges[i].w;
        } else {
            edges[out++] = edges[i];
        }
    }
    edges.resize(out);

    std::vector<edge_index_t> offsets(static_cast<size_t>(n) + 1, 0);
    for (const auto& e : edges) offsets[e.src + 1]++;
    for (size_t i = 1; i < offsets.size(); ++i) offsets[i] += offsets[i - 1];
    std::vector<node_t> neighbors(edges.size());
    std::vector<double> weights;
    if (weighted) weights.resize(edges.size());
    for (size_t i = 0; i < edges.size(); ++i) {
        neighbors[i] = edges[i].dst;
        if (weighted) weights[i] = edges[i].w;
    }
    return CsrGraph(n, std::move(offsets), std::move(neighbors),
                    std::move(weights), directed);
}

// Parses a whitespace-separated edge list: "src dst" or "src dst weight",
// '#' lines are comments. Node ids are dense 0-based and are not remapped.
inline CsrGraph load_edge_list(const std::string& path, bool directed,
                               bool weighted) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open edge list: " + path);
    std::vector<EdgeTriple> edges;
    std::string line;
    size_t line_no = 0;
    auto fail = [&](const std::string& what) {
        throw std::runtime_error(path + ":" + std::to_string(line_no) + ": " + what);
    };
    while (std::getline(in, line)) {
        ++line_no;
        const char* p = line.data();
        const char* end = p + line.size();
        auto skip_ws = [&] { while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p; };
        skip_ws();
        if (p == end || *p == '#') continue;

        uint64_t ids[2];
        for (int k = 0; k < 2; ++k) {
            auto [q, ec] = std::from_chars(p, end, ids[k]);
            if (ec != std::errc())
                fail("expected node id");
            p = q;
            skip_ws();
        }
        if (ids[0] > 0xffffffffULL || ids[1] > 0xffffffffULL)
            fail("node id too large");
        double w = 1.0;
        if (p < end) {
            auto [q, ec] = std::from_chars(p, end, w);
            if (ec != std::errc())
                fail("expected weight");
            p = q;
            skip_ws();
            if (p != end)
                fail("trailing characters");
            if (weighted && !(w > 0.0))
                fail("weight must be positive");
        }
        edges.push_back({static_cast<node_t>(ids[0]),
                         static_cast<node_t>(ids[1]), w});
    }
    return build_csr(std::move(edges), directed, weighted);
}

namespace detail {

// Gallop from `a` (smaller) into `b` (larger): for each element of `a`,
// double the probe stride until overshoot, then binary-search the bracket.
template <typename OnMatch>
inline void gallop_intersect(std::span<const node_t> a, std::span<const node_t> b,
                             OnMatch&& on_match) {
    size_t lo = 0;
    for (size_t i = 0; i < a.size() && lo < b.size(); ++i) {
        node_t x = a[i];
        size_t step = 1, hi = lo;
        while (hi < b.size() && b[hi] < x) {
            lo = hi + 1;
            hi += step;
            step <<= 1;
        }
        hi = std::min(hi, b.size());
        auto it = std::lower_bound(b.begin() + lo, b.begin() + hi, x);
        lo = static_cast<size_t>(it - b.begin());
        if (lo < b.size() && b[lo] == x) {
            on_match(x);
            ++lo;
        }
    }
}

template <typename OnMatch>
inline void merge_intersect(std::span<const node_t> a, std::span<const node_t> b,
                            OnMatch&& on_match) {
    size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) ++i;
        else if (b[j] < a[i]) ++j;
        else { on_match(a[i]); ++i; ++j; }
    }
}

inline bool is_strictly_sorted(std::span<const node_t> a) {
    for (size_t i = 0; i + 1 < a.size(); ++i)
        if (a[i] >= a[i + 1]) return false;
    return true;
}

// Dispatch: gallop when sizes are lopsided, linear merge otherwise.
template <typename OnMatch>
inline void intersect_visit(std::span<const node_t> a, std::span<const node_t> b,
                            OnMatch&& on_match) {
    assert(is_strictly_sorted(a) && is_strictly_sorted(b));
    if (a.size() > b.size()) std::swap(a, b);
    if (b.size() >= 2 * a.size())
        gallop_intersect(a, b, on_match);
    else
        merge_intersect(a, b, on_match);
}

} // namespace detail

inline std::vector<node_t> intersect_galloping(std::span<const node_t> a,
                                               std::span<const node_t> b) {
    std::vector<node_t> out;
    detail::intersect_visit(a, b, [&](node_t x) { out.push_back(x); });
    return out;
}

inline size_t intersect_count(std::span<const node_t> a,
                              std::span<const node_t> b) {
    size_t c = 0;
    detail::intersect_visit(a, b, [&](node_t) { ++c; });
    return c;
}

// |N(u) ∩ N(v)| with u and v themselves excluded: a node is not its own
// neighbor for this count, so self-loops never contribute.
inline size_t common_neighbor_count(const CsrGraph& g, node_t u, node_t v) {
    if (u >= g.node_count() || v >= g.node_count())
        throw std::out_of_range("common_neighbor_count: node id out of range");
    size_t c = 0;
    detail::intersect_visit(g.neighbors(u), g.neighbors(v), [&](node_t x) {
        if (x != u && x != v) ++c;
    });
    return c;
}

// Binary CSR cache, little-endian.
inline constexpr char kCsrMagic[8] = {'I', 'W', 'C', 'S', 'R', '0', '0', '1'};

inline void save_csr(const CsrGraph& g, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write csr cache: " + path);
    auto put = [&](const void* p, size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    put(kCsrMagic, sizeof(kCsrMagic));
    uint32_t version = 1;
    uint32_t flags = (g.directed() ? 1u : 0u) | (g.weighted() ? 2u : 0u);
    uint64_t n = g.node_count(), m = g.edge_count();
    put(&version, 4);
    put(&flags, 4);
    put(&n, 8);
    put(&m, 8);
    put(g.offsets().data(), g.offsets().size() * sizeof(edge_index_t));
    put(g.neighbor_array().data(), g.neighbor_array().size() * sizeof(node_t));
    if (g.weighted())
        put(g.weight_array().data(), g.weight_array().size() * sizeof(double));
    if (!out)
        throw std::runtime_error("short write to csr cache: " + path);
}

inline CsrGraph load_csr(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open csr cache: " + path);
    auto get = [&](void* p, size_t n) {
        in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in)
            throw std::runtime_error("truncated csr cache: " + path);
    };
    char magic[8];
    get(magic, 8);
    if (std::memcmp(magic, kCsrMagic, 8) != 0)
        throw std::runtime_error("bad csr cache magic: " + path);
    uint32_t version = 0, flags = 0;
    uint64_t n = 0, m = 0;
    get(&version, 4);
    get(&flags, 4);
    if (version != 1)
        throw std::runtime_error("unsupported csr cache version");
    get(&n, 8);
    get(&m, 8);
    std::vector<edge_index_t> offsets(n + 1);
    std::vector<node_t> neighbors(m);
    std::vector<double> weights;
    get(offsets.data(), offsets.size() * sizeof(edge_index_t));
    get(neighbors.data(), neighbors.size() * sizeof(node_t));
    if (flags & 2u) {
        weights.resize(m);
        get(weights.data(), weights.size() * sizeof(double));
    }
    return CsrGraph(static_cast<node_t>(n), std::move(offsets),
                    std::move(neighbors), std::move(weights), (flags & 1u) != 0);
}

} // namespace infowalk
