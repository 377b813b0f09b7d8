#pragma once

#include <algorithm>
#include <cassert>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "csr_graph.hpp"
#include "rng.hpp"
#include "walk_stats.hpp"

namespace infowalk {

enum class Strategy { huge, deepwalk, node2vec };

inline Strategy parse_strategy(const std::string& s) {
    if (s == "huge") return Strategy::huge;
    if (s == "deepwalk") return Strategy::deepwalk;
    if (s == "node2vec") return Strategy::node2vec;
    throw std::invalid_argument("unknown strategy: " + s);
}

inline const char* strategy_name(Strategy s) {
    switch (s) {
        case Strategy::huge: return "huge";
        case Strategy::deepwalk: return "deepwalk";
        case Strategy::node2vec: return "node2vec";
    }
    return "?";
}

struct WalkConfig {
    Strategy strategy = Strategy::huge;
    double p = 1.0;               // node2vec return parameter
    double q = 1.0;               // node2vec in-out parameter
    double mu = 0.995;            // info-stop correlation threshold
    double delta = 0.001;         // round-convergence threshold on divergence
    uint64_t min_len = 5;         // info-stop warm-up length
    uint64_t max_len = 80;        // info-stop hard cap
    uint64_t fixed_len = 80;      // walk length for fixed-length strategies
    uint64_t walks_per_node = 10; // rounds for fixed-length strategies
    uint64_t max_rounds = 100;    // hard cap on adaptive rounds
    bool full_path_messages = false; // ship whole path instead of running stats
    uint64_t seed = 1;
};

// Acceptance probability for an information-greedy step from u to v.
// Candidates that reach outside u's clustered neighborhood (few common
// neighbors) and bridge dissimilar degrees are favored; squashed through
// tanh so it is a probability. Edge weight scales the argument.
inline double huge_acceptance(const CsrGraph& g, node_t u, node_t v,
                              double edge_weight = 1.0) {
    double du = static_cast<double>(g.degree(u));
    double dv = static_cast<double>(g.degree(v));
    double cn = static_cast<double>(common_neighbor_count(g, u, v));
    double denom = std::max(du - cn, 1.0);
    double ratio = (du >= dv) ? (dv > 0.0 ? du / dv : du)
                              : dv / du; // du >= 1 since v neighbors u
    return std::tanh((ratio / denom) * edge_weight);
}

// Unnormalized second-order bias for stepping t -> u -> x: 1/p to return,
// 1 to stay within N(t), 1/q to move outward. Edge weight multiplies in.
inline double node2vec_weight(const CsrGraph& g, node_t t, node_t u, node_t x,
                              double p, double q, double edge_weight = 1.0) {
    (void)u;
    double bias;
    if (x == t)
        bias = 1.0 / p;
    else if (g.has_edge(t, x))
        bias = 1.0;
    else
        bias = 1.0 / q;
    return bias * edge_weight;
}

// State a walker carries across machines. The running statistics replace
// the path itself, so the serialized form stays constant-size no matter
// how long the walk has grown; the optional full-path payload exists as
// the costlier baseline for comparison.
struct WalkerMessage {
    uint64_t walker_id = 0;
    uint64_t steps = 0;   // transitions taken so far
    uint64_t node_id = 0; // destination node (its visit is recorded on arrival)

    bool has_info = false; // running entropy/length statistics ride along
    WalkInfoState info{};

    bool has_prev = false; // second-order walks need the step's origin
    uint64_t prev_node = 0;

    bool has_path = false; // baseline mode: every visited node rides along
    std::vector<uint64_t> path;

    size_t byte_size() const {
        size_t sz = 24;
        if (has_info) sz += 56;
        if (has_prev) sz += 8;
        if (has_path) sz += 8 * path.size();
        return sz;
    }

    std::vector<uint8_t> serialize() const {
        std::vector<uint8_t> out;
        out.reserve(byte_size());
        auto put_u64 = [&](uint64_t v) {
            for (int i = 0; i < 8; ++i)
                out.push_back(static_cast<uint8_t>(v >> (8 * i)));
        };
        auto put_f64 = [&](double d) {
            uint64_t v;
            std::memcpy(&v, &d, 8);
            put_u64(v);
        };
        put_u64(walker_id);
        put_u64(steps);
        put_u64(node_id);
        if (has_info) {
            put_f64(info.h);
            put_u64(info.len);
            put_f64(info.e_h);
            put_f64(info.e_l);
            put_f64(info.e_hl);
            put_f64(info.e_h2);
            put_f64(info.e_l2);
        }
        if (has_prev) put_u64(prev_node);
        if (has_path)
            for (uint64_t v : path) put_u64(v);
        assert(out.size() == byte_size());
        return out;
    }

    // Layout is run-global (every message in a run agrees), so the reader
    // is told which payloads to expect; path length is whatever remains.
    static WalkerMessage deserialize(std::span<const uint8_t> bytes, bool with_info,
                                     bool with_prev, bool with_path) {
        size_t pos = 0;
        auto get_u64 = [&]() {
            if (pos + 8 > bytes.size())
                throw std::runtime_error("walker message truncated");
            uint64_t v = 0;
            for (int i = 0; i < 8; ++i)
                v |= static_cast<uint64_t>(bytes[pos + i]) << (8 * i);
            pos += 8;
            return v;
        };
        auto get_f64 = [&]() {
            uint64_t v = get_u64();
            double d;
            std::memcpy(&d, &v, 8);
            return d;
        };
        WalkerMessage m;
        m.walker_id = get_u64();
        m.steps = get_u64();
        m.node_id = get_u64();
        if (with_info) {
            m.has_info = true;
            m.info.h = get_f64();
            m.info.len = get_u64();
            m.info.e_h = get_f64();
            m.info.e_l = get_f64();
            m.info.e_hl = get_f64();
            m.info.e_h2 = get_f64();
            m.info.e_l2 = get_f64();
        }
        if (with_prev) {
            m.has_prev = true;
            m.prev_node = get_u64();
        }
        if (with_path) {
            m.has_path = true;
            if ((bytes.size() - pos) % 8 != 0)
                throw std::runtime_error("walker message has ragged path payload");
            while (pos < bytes.size()) m.path.push_back(get_u64());
        } else if (pos != bytes.size()) {
            throw std::runtime_error("walker message has trailing bytes");
        }
        return m;
    }
};

// Serialized size of one walker crossing, by mode. Constant for running
// statistics; grows with the walk when full paths are shipped.
inline size_t message_size(Strategy s, bool full_path, uint64_t path_len) {
    if (full_path) return 24 + 8 * path_len;
    size_t sz = 24;
    if (s == Strategy::huge) sz += 56;
    if (s == Strategy::node2vec) sz += 8;
    return sz;
}

using Corpus = std::vector<std::vector<node_t>>;

struct CommReport {
    struct PerMachine {
        uint64_t machine_id = 0;
        uint64_t local_steps = 0;
        uint64_t msgs_sent = 0;
        uint64_t bytes_sent = 0;
    };
    std::vector<PerMachine> machines;

    uint64_t total_steps() const {
        uint64_t t = 0;
        for (auto& m : machines) t += m.local_steps;
        return t;
    }
    uint64_t total_msgs() const {
        uint64_t t = 0;
        for (auto& m : machines) t += m.msgs_sent;
        return t;
    }
    uint64_t total_bytes() const {
        uint64_t t = 0;
        for (auto& m : machines) t += m.bytes_sent;
        return t;
    }
};

struct WalkResult {
    Corpus corpus;                            // indexed by walker id
    CommReport comm;
    std::vector<double> divergence_by_round;  // adaptive mode only
    uint64_t rounds = 0;
};

enum class StepKind { moved_local, sent_message, terminated };

struct StepOutcome {
    StepKind kind = StepKind::terminated;
    uint32_t to_machine = 0; // valid for sent_message
};

// Simulates a cluster of logical machines running walks in bulk-synchronous
// supersteps. Each machine owns a slice of the node set; a walker steps
// locally until its next node lives elsewhere, at which point its state is
// serialized, counted against the wire, and delivered at the next barrier.
// All random draws are keyed by (seed, walker, step, trial), never by
// machine, so the produced corpus is invariant to the partitioning.
class LogicalCluster {
public:
    struct Walker {
        uint64_t id = 0;
        uint64_t steps = 0; // transitions taken
        node_t node = 0;    // current (pending-visit) node
        node_t prev = 0;    // node before the last transition
        WalkInfoState info{};
        std::vector<uint64_t> path; // full-path baseline payload
        WalkerMessage pending;      // filled when a step crosses machines
    };

    LogicalCluster(const CsrGraph& graph, std::vector<uint32_t> owner,
                   uint32_t machine_count, WalkConfig cfg)
        : g_(graph), owner_(std::move(owner)), machines_(machine_count), cfg_(cfg) {
        if (machine_count == 0)
            throw std::invalid_argument("cluster needs at least one machine");
        if (owner_.size() != g_.node_count())
            throw std::invalid_argument("owner map size mismatch");
        for (uint32_t m : owner_)
            if (m >= machine_count)
                throw std::invalid_argument("owner map references unknown machine");
        if (cfg_.min_len > cfg_.max_len)
            throw std::invalid_argument("min_len exceeds max_len");
        if (g_.weighted()) build_cumulative_weights();
        state_.resize(machines_);
    }

    WalkResult run_walks() {
        WalkResult result;
        result.comm.machines.resize(machines_);
        for (uint32_t m = 0; m < machines_; ++m)
            result.comm.machines[m].machine_id = m;
        if (g_.node_count() == 0) return result;

        CorpusStats stats(g_.node_count());
        bool adaptive = cfg_.strategy == Strategy::huge;
        uint64_t round_cap = adaptive ? cfg_.max_rounds : cfg_.walks_per_node;
        double prev_div = 0.0;

        for (uint64_t round = 0; round < round_cap; ++round) {
            Corpus round_walks = run_round(round, result.comm);
            for (auto& w : round_walks) stats.add_walk(w);
            for (auto& w : round_walks) result.corpus.push_back(std::move(w));
            result.rounds = round + 1;

            if (adaptive) {
                // An edgeless graph yields only length-1 walks; the
                // degree-vs-visits divergence is undefined there and more
                // rounds cannot add information, so one round suffices.
                if (g_.edge_count() == 0) break;
                double div = relative_entropy(g_, stats);
                result.divergence_by_round.push_back(div);
                if (round >= 1 && walks_converged(prev_div, div, cfg_.delta))
                    break;
                prev_div = div;
            }
        }
        return result;
    }

    // One decision cycle for a walker sitting un-visited at walker.node on
    // machine `mach`: record the visit, test the stopping rule, then sample
    // the next node. Local moves keep the walker; a crossing serializes it
    // into walker.pending and bills the wire.
    StepOutcome walk_step(Walker& w, uint32_t mach, CommReport::PerMachine& acct) {
        record_visit(w, state_[mach]);
        if (walk_done(w)) return {StepKind::terminated, 0};
        auto next = choose_next(w);
        if (!next) return {StepKind::terminated, 0};
        acct.local_steps++;
        node_t v = *next;
        if (owner_[v] == mach) {
            w.prev = w.node;
            w.node = v;
            w.steps++;
            return {StepKind::moved_local, 0};
        }
        w.pending = make_message(w, v);
        acct.msgs_sent++;
        acct.bytes_sent += w.pending.byte_size();
        return {StepKind::sent_message, owner_[v]};
    }

    // Clears per-walk machine state (counts, fragments, queues).
    void reset_machines() { state_.assign(machines_, MachineState{}); }

private:
    struct MachineState {
        std::vector<Walker> inbox;
        // Per-walker visit counts of owned nodes; the authoritative n(v)
        // for entropy updates since v is only ever visited on its owner.
        std::unordered_map<uint64_t, std::unordered_map<node_t, uint64_t>> counts;
        // Per-walker (visit index, node) runs recorded on this machine.
        std::unordered_map<uint64_t, std::vector<std::pair<uint64_t, node_t>>>
            fragments;
    };

    void build_cumulative_weights() {
        cum_weights_.resize(g_.edge_count());
        for (node_t u = 0; u < g_.node_count(); ++u) {
            auto ws = g_.edge_weights(u);
            double acc = 0.0;
            size_t base = g_.offsets()[u];
            for (size_t i = 0; i < ws.size(); ++i) {
                acc += ws[i];
                cum_weights_[base + i] = acc;
            }
        }
    }

    // Index into u's adjacency drawn proportional to edge weight.
    size_t sample_weighted_index(node_t u, double r01) const {
        size_t lo = g_.offsets()[u], hi = g_.offsets()[u + 1];
        assert(hi > lo);
        double target = r01 * cum_weights_[hi - 1];
        auto it = std::upper_bound(cum_weights_.begin() + lo,
                                   cum_weights_.begin() + hi, target);
        if (it == cum_weights_.begin() + hi) --it;
        return static_cast<size_t>(it - (cum_weights_.begin() + lo));
    }

    // Proposal draw: index into u's adjacency, uniform or weight-biased.
    size_t propose(node_t u, uint64_t walker, uint64_t step, uint64_t trial,
                   bool weight_biased) const {
        WalkRandom wr{cfg_.seed};
        if (weight_biased && g_.weighted())
            return sample_weighted_index(u,
                                         wr.unit(walker, step, trial, kDrawCandidate));
        return static_cast<size_t>(
            wr.below(walker, step, trial, kDrawCandidate, g_.degree(u)));
    }

    static constexpr int kMaxTrials = 64;

    // Samples the next node from w.node, or nothing at a dead end.
    std::optional<node_t> choose_next(const Walker& w) const {
        node_t u = w.node;
        auto nbrs = g_.neighbors(u);
        if (nbrs.empty()) return std::nullopt;
        WalkRandom wr{cfg_.seed};

        switch (cfg_.strategy) {
            case Strategy::deepwalk:
                return nbrs[propose(u, w.id, w.steps, 0, /*weight_biased=*/true)];

            case Strategy::huge: {
                // Uniform proposal; information-greedy acceptance. Bounded
                // trials: past the cap the last candidate is taken so a
                // walker can never stall.
                node_t v = nbrs[0];
                for (int trial = 0; trial < kMaxTrials; ++trial) {
                    size_t idx = propose(u, w.id, w.steps, trial, false);
                    v = nbrs[idx];
                    double ew = g_.weighted() ? g_.edge_weights(u)[idx] : 1.0;
                    double acc = huge_acceptance(g_, u, v, ew);
                    if (wr.unit(w.id, w.steps, trial, kDrawAccept) < acc) return v;
                }
                return v;
            }

            case Strategy::node2vec: {
                if (w.steps == 0) // no origin yet: plain first-order step
                    return nbrs[propose(u, w.id, w.steps, 0, true)];
                double env = std::max({1.0 / cfg_.p, 1.0, 1.0 / cfg_.q});
                node_t v = nbrs[0];
                for (int trial = 0; trial < kMaxTrials; ++trial) {
                    // Weight rides in the proposal; only the second-order
                    // bias is left to test against the envelope.
                    size_t idx = propose(u, w.id, w.steps, trial, true);
                    v = nbrs[idx];
                    double bias = node2vec_weight(g_, w.prev, u, v, cfg_.p, cfg_.q, 1.0);
                    if (wr.unit(w.id, w.steps, trial, kDrawAccept) * env < bias)
                        return v;
                }
                return v;
            }
        }
        return std::nullopt;
    }

    bool walk_done(const Walker& w) const {
        if (cfg_.strategy == Strategy::huge)
            return w.info.should_terminate(cfg_.mu, cfg_.min_len, cfg_.max_len);
        return w.info.len >= cfg_.fixed_len;
    }

    WalkerMessage make_message(const Walker& w, node_t dest) const {
        WalkerMessage m;
        m.walker_id = w.id;
        m.steps = w.steps + 1;
        m.node_id = dest;
        if (cfg_.full_path_messages) {
            // The carried path subsumes both statistics and origin.
            m.has_path = true;
            m.path = w.path;
        } else {
            if (cfg_.strategy == Strategy::huge) {
                m.has_info = true;
                m.info = w.info;
            }
            if (cfg_.strategy == Strategy::node2vec) {
                m.has_prev = true;
                m.prev_node = w.node;
            }
        }
        return m;
    }

    Walker revive(const WalkerMessage& m, MachineState& ms, uint32_t mach) const {
        Walker w;
        w.id = m.walker_id;
        w.steps = m.steps;
        w.node = static_cast<node_t>(m.node_id);
        if (m.has_prev) w.prev = static_cast<node_t>(m.prev_node);
        if (m.has_path) {
            // Baseline: nothing was left behind, so replay the carried path
            // to rebuild the running statistics and this machine's counts.
            w.path.reserve(m.path.size());
            std::unordered_map<node_t, uint64_t> replay_counts;
            for (uint64_t pv : m.path) {
                node_t v = static_cast<node_t>(pv);
                w.info.visit(replay_counts[v]);
                replay_counts[v]++;
                w.path.push_back(pv);
            }
            if (!m.path.empty())
                w.prev = static_cast<node_t>(m.path.back());
            auto& mine = ms.counts[w.id];
            mine.clear();
            for (auto& [v, c] : replay_counts)
                if (owner_[v] == mach) mine[v] = c;
        } else if (m.has_info) {
            w.info = m.info;
        } else {
            // Fixed-length first-order walks only need the length.
            w.info.len = m.steps; // visits recorded so far
        }
        return w;
    }

    // Records the pending visit of w.node on the walker's current machine.
    void record_visit(Walker& w, MachineState& ms) {
        auto& cnt = ms.counts[w.id][w.node];
        w.info.visit(cnt);
        cnt++;
        ms.fragments[w.id].emplace_back(w.steps, w.node);
        if (cfg_.full_path_messages) w.path.push_back(w.node);
    }

    Corpus run_round(uint64_t round, CommReport& comm) {
        reset_machines();
        uint64_t id_base = round * static_cast<uint64_t>(g_.node_count());

        for (node_t s = 0; s < g_.node_count(); ++s) {
            Walker w;
            w.id = id_base + s;
            w.node = s;
            state_[owner_[s]].inbox.push_back(std::move(w));
        }

        bool any = true;
        while (any) {
            std::vector<std::vector<WalkerMessage>> wire(machines_);
            for (uint32_t m = 0; m < machines_; ++m) {
                auto inbox = std::move(state_[m].inbox);
                state_[m].inbox.clear();
                for (auto& w : inbox) {
                    for (;;) {
                        StepOutcome out = walk_step(w, m, comm.machines[m]);
                        if (out.kind == StepKind::moved_local) continue;
                        if (out.kind == StepKind::sent_message)
                            wire[out.to_machine].push_back(std::move(w.pending));
                        break;
                    }
                }
            }
            any = false;
            for (uint32_t m = 0; m < machines_; ++m) {
                for (auto& msg : wire[m]) {
                    // Real transports hand over bytes; round-trip through
                    // the serialized form so the format stays load-bearing.
                    auto bytes = msg.serialize();
                    WalkerMessage back = WalkerMessage::deserialize(
                        bytes, msg.has_info, msg.has_prev, msg.has_path);
                    state_[m].inbox.push_back(revive(back, state_[m], m));
                }
                if (!state_[m].inbox.empty()) any = true;
            }
        }

        // Stitch per-machine fragments back into whole walks.
        Corpus walks(g_.node_count());
        const node_t gap = g_.node_count();
        for (uint32_t m = 0; m < machines_; ++m) {
            for (auto& [id, frag] : state_[m].fragments) {
                auto& walk = walks[id - id_base];
                for (auto& [idx, node] : frag) {
                    if (walk.size() <= idx) walk.resize(idx + 1, gap);
                    walk[idx] = node;
                }
            }
        }
        for (auto& walk : walks)
            for (node_t v : walk)
                if (v == gap) throw std::logic_error("walk reassembly left a gap");
        return walks;
    }

    const CsrGraph& g_;
    std::vector<uint32_t> owner_;
    uint32_t machines_;
    WalkConfig cfg_;
    std::vector<double> cum_weights_;
    std::vector<MachineState> state_;
};

inline void write_corpus(const Corpus& corpus, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write corpus: " + path);
    for (const auto& walk : corpus) {
        for (size_t i = 0; i < walk.size(); ++i) {
            if (i) out << ' ';
            out << walk[i];
        }
        out << '\n';
    }
    if (!out)
        throw std::runtime_error("short write to corpus: " + path);
}

inline Corpus read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open corpus: " + path);
    Corpus corpus;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<node_t> walk;
        const char* p = line.data();
        const char* end = p + line.size();
        while (p < end) {
            while (p < end && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
            if (p == end) break;
            uint32_t v = 0;
            auto [q, ec] = std::from_chars(p, end, v);
            if (ec != std::errc())
                throw std::runtime_error("bad corpus token in " + path);
            walk.push_back(v);
            p = q;
        }
        if (!walk.empty()) corpus.push_back(std::move(walk));
    }
    return corpus;
}

inline void write_comm_report(const CommReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write comm report: " + path);
    out << "machine_id,local_steps,msgs_sent,bytes_sent\n";
    for (const auto& m : report.machines)
        out << m.machine_id << ',' << m.local_steps << ',' << m.msgs_sent << ','
            << m.bytes_sent << '\n';
    if (!out)
        throw std::runtime_error("short write to comm report: " + path);
}

} // namespace infowalk
