#include "infowalk/sampler.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace infowalk;

namespace {

std::vector<uint32_t> hash_owner(node_t n, uint32_t m) {
    std::vector<uint32_t> owner(n);
    for (node_t v = 0; v < n; ++v) owner[v] = v % m;
    return owner;
}

TEST(HugeAcceptance, DegreeRatioExample) {
    // deg(u)=4, deg(v)=2, one common neighbor
    CsrGraph g = build_csr(
        {{0, 1, 1}, {0, 2, 1}, {0, 3, 1}, {0, 4, 1}, {1, 2, 1}}, false, false);
    ASSERT_EQ(g.degree(0), 4u);
    ASSERT_EQ(g.degree(1), 2u);
    ASSERT_EQ(common_neighbor_count(g, 0, 1), 1u);
    EXPECT_NEAR(huge_acceptance(g, 0, 1), std::tanh(2.0 / 3.0), 1e-12);
    EXPECT_NEAR(huge_acceptance(g, 0, 1), 0.5827, 1e-4);
}

TEST(HugeAcceptance, EqualDegreesNoCommon) {
    CsrGraph ring = build_csr(testsupport::ring_edges(4), false, false);
    ASSERT_EQ(common_neighbor_count(ring, 0, 1), 0u);
    EXPECT_NEAR(huge_acceptance(ring, 0, 1), std::tanh(1.0 / 2.0), 1e-12);
}

TEST(HugeAcceptance, WeightScalesArgument) {
    CsrGraph ring = build_csr(testsupport::ring_edges(4), false, false);
    EXPECT_NEAR(huge_acceptance(ring, 0, 1, 3.0), std::tanh(1.5), 1e-12);
}

TEST(HugeAcceptance, StrictlyInsideUnitIntervalOnRandomGraphs) {
    Rng rng(88);
    for (int it = 0; it < 10; ++it) {
        CsrGraph g = testsupport::erdos_renyi(60, 6.0, rng.next_u64());
        for (node_t u = 0; u < g.node_count(); ++u)
            for (node_t v : g.neighbors(u)) {
                double p = huge_acceptance(g, u, v);
                EXPECT_GT(p, 0.0);
                EXPECT_LT(p, 1.0);
            }
    }
}

TEST(Node2vecWeight, DistanceTable) {
    // path 0-1-2 plus triangle edge for the distance-1 case
    CsrGraph tri = build_csr({{0, 1, 1}, {1, 2, 1}, {0, 2, 1}}, false, false);
    CsrGraph path = build_csr(testsupport::path_edges(3), false, false);
    EXPECT_DOUBLE_EQ(node2vec_weight(path, 0, 1, 0, 4.0, 1.0), 0.25); // back to t
    EXPECT_DOUBLE_EQ(node2vec_weight(tri, 0, 1, 2, 4.0, 7.0), 1.0);   // within N(t)
    EXPECT_DOUBLE_EQ(node2vec_weight(path, 0, 1, 2, 1.0, 8.0), 0.125); // outward
    // p = q = 1 degenerates to uniform
    EXPECT_DOUBLE_EQ(node2vec_weight(path, 0, 1, 0, 1.0, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(node2vec_weight(path, 0, 1, 2, 1.0, 1.0), 1.0);
}

TEST(WalkerMessage, ConstantSizeLayouts) {
    EXPECT_EQ(message_size(Strategy::huge, false, 40), 80u);
    EXPECT_EQ(message_size(Strategy::deepwalk, false, 40), 24u);
    EXPECT_EQ(message_size(Strategy::node2vec, false, 40), 32u);
    EXPECT_EQ(message_size(Strategy::huge, true, 10), 24u + 80u);

    WalkerMessage m;
    m.walker_id = 7;
    m.steps = 13;
    m.node_id = 42;
    m.has_info = true;
    m.info.h = 1.25;
    m.info.len = 13;
    m.info.e_h = 0.5;
    m.info.e_l = 7.0;
    m.info.e_hl = 4.5;
    m.info.e_h2 = 0.3;
    m.info.e_l2 = 63.0;
    EXPECT_EQ(m.byte_size(), 80u);
    EXPECT_EQ(m.serialize().size(), 80u);
}

TEST(WalkerMessage, RoundTripsEveryLayout) {
    WalkerMessage m;
    m.walker_id = 11;
    m.steps = 3;
    m.node_id = 9;

    { // bare (first-order fixed-length walks)
        auto bytes = m.serialize();
        EXPECT_EQ(bytes.size(), 24u);
        auto back = WalkerMessage::deserialize(bytes, false, false, false);
        EXPECT_EQ(back.walker_id, 11u);
        EXPECT_EQ(back.steps, 3u);
        EXPECT_EQ(back.node_id, 9u);
    }
    { // running statistics
        WalkerMessage mi = m;
        mi.has_info = true;
        mi.info.h = -0.0; // sign bit must survive bit-exactly
        mi.info.len = 3;
        mi.info.e_h = 1e-300;
        mi.info.e_l = 2.0;
        mi.info.e_hl = 3.5;
        mi.info.e_h2 = 0.125;
        mi.info.e_l2 = 14.0 / 3.0;
        auto back = WalkerMessage::deserialize(mi.serialize(), true, false, false);
        EXPECT_EQ(back.info.len, 3u);
        EXPECT_EQ(back.info.h, mi.info.h);
        EXPECT_EQ(back.info.e_hl, mi.info.e_hl);
        EXPECT_EQ(back.info.e_l2, mi.info.e_l2);
    }
    { // previous node
        WalkerMessage mp = m;
        mp.has_prev = true;
        mp.prev_node = 4;
        auto bytes = mp.serialize();
        EXPECT_EQ(bytes.size(), 32u);
        auto back = WalkerMessage::deserialize(bytes, false, true, false);
        EXPECT_EQ(back.prev_node, 4u);
    }
    { // full path
        WalkerMessage mf = m;
        mf.has_path = true;
        mf.path = {9, 8, 7, 9};
        auto bytes = mf.serialize();
        EXPECT_EQ(bytes.size(), 24u + 32u);
        auto back = WalkerMessage::deserialize(bytes, false, false, true);
        EXPECT_EQ(back.path, mf.path);
    }
}

TEST(WalkerMessage, DeserializeRejectsMalformedBytes) {
    WalkerMessage m;
    m.has_info = true;
    auto bytes = m.serialize();
    bytes.pop_back();
    EXPECT_THROW(WalkerMessage::deserialize(bytes, true, false, false),
                 std::runtime_error);

    std::vector<uint8_t> ragged(24 + 4, 0); // path payload not 8-aligned
    EXPECT_THROW(WalkerMessage::deserialize(ragged, false, false, true),
                 std::runtime_error);

    std::vector<uint8_t> trailing(24 + 8, 0);
    EXPECT_THROW(WalkerMessage::deserialize(trailing, false, false, false),
                 std::runtime_error);
}

TEST(WalkStep, CrossingEmitsConstantMessageWithConsistentFields) {
    CsrGraph g = build_csr({{0, 1, 1}}, false, false);
    WalkConfig cfg;
    cfg.seed = 5;
    LogicalCluster cluster(g, {0, 1}, 2, cfg);
    LogicalCluster::Walker w;
    w.id = 0;
    w.node = 0;
    CommReport::PerMachine acct;
    StepOutcome out = cluster.walk_step(w, 0, acct);
    ASSERT_EQ(out.kind, StepKind::sent_message);
    EXPECT_EQ(out.to_machine, 1u);
    EXPECT_EQ(w.pending.byte_size(), 80u);
    EXPECT_EQ(w.pending.steps, w.pending.info.len); // steps mirror walk length
    EXPECT_EQ(w.pending.node_id, 1u);
    EXPECT_EQ(acct.msgs_sent, 1u);
    EXPECT_EQ(acct.bytes_sent, 80u);
}

TEST(RunWalks, SingleMachineSendsNothing) {
    CsrGraph g = testsupport::erdos_renyi(40, 5.0, 3);
    WalkConfig cfg;
    cfg.seed = 11;
    LogicalCluster cluster(g, std::vector<uint32_t>(g.node_count(), 0), 1, cfg);
    WalkResult r = cluster.run_walks();
    EXPECT_EQ(r.comm.total_msgs(), 0u);
    EXPECT_EQ(r.comm.total_bytes(), 0u);
    EXPECT_GT(r.corpus.size(), 0u);
}

TEST(RunWalks, PathCutBillsExactlyEightyBytesPerCrossing) {
    CsrGraph g = build_csr(testsupport::path_edges(10), false, false);
    std::vector<uint32_t> owner(10);
    for (node_t v = 0; v < 10; ++v) owner[v] = v < 5 ? 0 : 1;
    WalkConfig cfg;
    cfg.seed = 21;
    LogicalCluster cluster(g, owner, 2, cfg);
    WalkResult r = cluster.run_walks();
    EXPECT_GT(r.comm.total_msgs(), 0u);
    EXPECT_EQ(r.comm.total_bytes(), 80u * r.comm.total_msgs());
}

TEST(RunWalks, IsolatedNodeWalksHaveLengthOne) {
    CsrGraph g = build_csr({{0, 1, 1}}, false, false, 3); // node 2 isolated
    WalkConfig cfg;
    cfg.seed = 2;
    LogicalCluster cluster(g, hash_owner(3, 1), 1, cfg);
    WalkResult r = cluster.run_walks();
    ASSERT_EQ(r.corpus.size(), r.rounds * 3);
    for (uint64_t round = 0; round < r.rounds; ++round) {
        const auto& walk = r.corpus[round * 3 + 2];
        ASSERT_EQ(walk.size(), 1u);
        EXPECT_EQ(walk[0], 2u);
    }
}

TEST(RunWalks, EmptyGraphYieldsEmptyCorpus) {
    CsrGraph g = build_csr({}, false, false, 0);
    WalkConfig cfg;
    LogicalCluster cluster(g, {}, 1, cfg);
    WalkResult r = cluster.run_walks();
    EXPECT_TRUE(r.corpus.empty());
    EXPECT_EQ(r.rounds, 0u);
}

TEST(RunWalks, EdgelessGraphStopsAfterOneRound) {
    CsrGraph g = build_csr({}, false, false, 4);
    WalkConfig cfg;
    LogicalCluster cluster(g, hash_owner(4, 1), 1, cfg);
    WalkResult r = cluster.run_walks();
    EXPECT_EQ(r.rounds, 1u);
    ASSERT_EQ(r.corpus.size(), 4u);
    for (const auto& walk : r.corpus) EXPECT_EQ(walk.size(), 1u);
}

TEST(RunWalks, FixedStrategyProducesExactWalkCounts) {
    CsrGraph g = build_csr(testsupport::ring_edges(17), false, false);
    WalkConfig cfg;
    cfg.strategy = Strategy::deepwalk;
    cfg.fixed_len = 12;
    cfg.walks_per_node = 3;
    cfg.seed = 9;
    LogicalCluster cluster(g, hash_owner(17, 1), 1, cfg);
    WalkResult r = cluster.run_walks();
    ASSERT_EQ(r.corpus.size(), 3u * 17u);
    for (const auto& walk : r.corpus) EXPECT_EQ(walk.size(), 12u);
    EXPECT_EQ(r.rounds, 3u);
}

TEST(RunWalks, WalksStartAtTheirSourceNode) {
    CsrGraph g = testsupport::erdos_renyi(30, 4.0, 17);
    WalkConfig cfg;
    cfg.seed = 3;
    LogicalCluster cluster(g, hash_owner(30, 2), 2, cfg);
    WalkResult r = cluster.run_walks();
    node_t n = g.node_count();
    for (uint64_t i = 0; i < r.corpus.size(); ++i)
        EXPECT_EQ(r.corpus[i][0], static_cast<node_t>(i % n));
}

TEST(RunWalks, LengthsSumToCorpusOccurrences) {
    CsrGraph g = testsupport::erdos_renyi(50, 5.0, 23);
    WalkConfig cfg;
    cfg.seed = 13;
    LogicalCluster cluster(g, hash_owner(50, 3), 3, cfg);
    WalkResult r = cluster.run_walks();
    CorpusStats stats(g.node_count());
    uint64_t total_len = 0;
    for (const auto& walk : r.corpus) {
        total_len += walk.size();
        stats.add_walk(walk);
        for (node_t v : walk) EXPECT_LT(v, g.node_count());
    }
    EXPECT_EQ(stats.total, total_len);
}

TEST(RunWalks, CorpusInvariantToMachineCount) {
    CsrGraph g = testsupport::erdos_renyi(60, 5.0, 29);
    for (Strategy s : {Strategy::huge, Strategy::deepwalk, Strategy::node2vec}) {
        WalkConfig cfg;
        cfg.strategy = s;
        cfg.p = 0.5;
        cfg.q = 2.0;
        cfg.walks_per_node = 2;
        cfg.seed = 31;
        LogicalCluster one(g, hash_owner(60, 1), 1, cfg);
        LogicalCluster four(g, hash_owner(60, 4), 4, cfg);
        WalkResult a = one.run_walks();
        WalkResult b = four.run_walks();
        EXPECT_EQ(a.corpus, b.corpus) << "strategy " << strategy_name(s);
        EXPECT_EQ(a.rounds, b.rounds);
        EXPECT_EQ(a.comm.total_msgs(), 0u);
        EXPECT_GT(b.comm.total_msgs(), 0u);
    }
}

TEST(RunWalks, DeterministicForFixedSeed) {
    CsrGraph g = testsupport::erdos_renyi(40, 4.0, 37);
    WalkConfig cfg;
    cfg.seed = 41;
    LogicalCluster c1(g, hash_owner(40, 2), 2, cfg);
    LogicalCluster c2(g, hash_owner(40, 2), 2, cfg);
    EXPECT_EQ(c1.run_walks().corpus, c2.run_walks().corpus);

    cfg.seed = 42;
    LogicalCluster c3(g, hash_owner(40, 2), 2, cfg);
    EXPECT_NE(c2.run_walks().corpus, c3.run_walks().corpus);
}

TEST(RunWalks, FullPathBaselineWalksIdentically) {
    CsrGraph g = testsupport::erdos_renyi(50, 5.0, 43);
    WalkConfig cfg;
    cfg.seed = 47;
    LogicalCluster compact(g, hash_owner(50, 3), 3, cfg);
    WalkConfig full_cfg = cfg;
    full_cfg.full_path_messages = true;
    LogicalCluster full(g, hash_owner(50, 3), 3, full_cfg);

    WalkResult a = compact.run_walks();
    WalkResult b = full.run_walks();
    EXPECT_EQ(a.corpus, b.corpus); // same walks, same termination steps
    EXPECT_EQ(a.comm.total_msgs(), b.comm.total_msgs());
    EXPECT_EQ(a.comm.total_bytes(), 80u * a.comm.total_msgs());
    EXPECT_NE(b.comm.total_bytes(), a.comm.total_bytes());
}

TEST(RunWalks, AdaptiveRoundsStopOnDivergencePlateau) {
    CsrGraph g = build_csr(testsupport::two_cliques_bridged(8), false, false);
    WalkConfig cfg;
    cfg.seed = 53;
    LogicalCluster cluster(g, hash_owner(g.node_count(), 2), 2, cfg);
    WalkResult r = cluster.run_walks();
    ASSERT_GE(r.rounds, 2u);
    ASSERT_EQ(r.divergence_by_round.size(), r.rounds);
    ASSERT_LE(r.rounds, cfg.max_rounds);
    if (r.rounds < cfg.max_rounds) {
        double last = r.divergence_by_round[r.rounds - 1];
        double prev = r.divergence_by_round[r.rounds - 2];
        EXPECT_LE(std::abs(last - prev), cfg.delta);
    }
}

TEST(RunWalks, InfoStoppingRespectsLengthBounds) {
    CsrGraph g = testsupport::erdos_renyi(80, 6.0, 59);
    WalkConfig cfg;
    cfg.seed = 61;
    LogicalCluster cluster(g, hash_owner(80, 1), 1, cfg);
    WalkResult r = cluster.run_walks();
    for (const auto& walk : r.corpus) {
        if (g.degree(walk[0]) == 0) continue;
        EXPECT_GE(walk.size(), cfg.min_len);
        EXPECT_LE(walk.size(), cfg.max_len);
    }
}

TEST(RunWalks, DeepwalkFollowsEdgeWeights) {
    // two-leaf star with a 9:1 weight skew
    std::vector<EdgeTriple> es{{0, 1, 9.0}, {0, 2, 1.0}};
    CsrGraph g = build_csr(es, false, true);
    WalkConfig cfg;
    cfg.strategy = Strategy::deepwalk;
    cfg.fixed_len = 2;
    cfg.walks_per_node = 600;
    cfg.seed = 67;
    LogicalCluster cluster(g, hash_owner(3, 1), 1, cfg);
    WalkResult r = cluster.run_walks();
    uint64_t to_heavy = 0, from_center = 0;
    for (uint64_t i = 0; i < r.corpus.size(); ++i) {
        if (r.corpus[i][0] != 0) continue;
        from_center++;
        if (r.corpus[i][1] == 1) to_heavy++;
    }
    ASSERT_EQ(from_center, 600u);
    double frac = static_cast<double>(to_heavy) / static_cast<double>(from_center);
    EXPECT_NEAR(frac, 0.9, 0.05);
}

TEST(RunWalks, Node2vecReturnParameterBiasesBacktracking) {
    CsrGraph g = build_csr(testsupport::path_edges(3), false, false);
    WalkConfig cfg;
    cfg.strategy = Strategy::node2vec;
    cfg.p = 0.01; // returning is ~100x more likely than moving outward
    cfg.q = 1.0;
    cfg.fixed_len = 3;
    cfg.walks_per_node = 400;
    cfg.seed = 71;
    LogicalCluster cluster(g, hash_owner(3, 1), 1, cfg);
    WalkResult r = cluster.run_walks();
    uint64_t returns = 0, via_middle = 0;
    for (uint64_t i = 0; i < r.corpus.size(); ++i) {
        const auto& walk = r.corpus[i];
        if (walk[0] != 0) continue; // start at an endpoint: 0 -> 1 forced
        ASSERT_EQ(walk[1], 1u);
        via_middle++;
        if (walk[2] == 0) returns++;
    }
    ASSERT_GT(via_middle, 0u);
    double frac = static_cast<double>(returns) / static_cast<double>(via_middle);
    EXPECT_GT(frac, 0.9);
}

TEST(CorpusIo, WriteReadRoundTrip) {
    Corpus corpus{{0, 1, 2}, {5}, {3, 3, 3, 3}};
    std::string path = ::testing::TempDir() + "corpus_roundtrip.txt";
    write_corpus(corpus, path);
    EXPECT_EQ(read_corpus(path), corpus);
    std::remove(path.c_str());
}

TEST(CorpusIo, CommReportCsvShape) {
    CommReport rep;
    rep.machines.push_back({0, 10, 2, 160});
    rep.machines.push_back({1, 7, 0, 0});
    std::string path = ::testing::TempDir() + "comm.csv";
    write_comm_report(rep, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "machine_id,local_steps,msgs_sent,bytes_sent");
    std::getline(in, line);
    EXPECT_EQ(line, "0,10,2,160");
    std::getline(in, line);
    EXPECT_EQ(line, "1,7,0,0");
    std::remove(path.c_str());
}

TEST(StrategyParsing, NamesRoundTrip) {
    EXPECT_EQ(parse_strategy("huge"), Strategy::huge);
    EXPECT_EQ(parse_strategy("deepwalk"), Strategy::deepwalk);
    EXPECT_EQ(parse_strategy("node2vec"), Strategy::node2vec);
    EXPECT_THROW(parse_strategy("moonwalk"), std::invalid_argument);
    EXPECT_STREQ(strategy_name(Strategy::huge), "huge");
}

TEST(ClusterValidation, RejectsBadConstruction) {
    CsrGraph g = build_csr({{0, 1, 1}}, false, false);
    WalkConfig cfg;
    EXPECT_THROW(LogicalCluster(g, {0}, 1, cfg), std::invalid_argument);
    EXPECT_THROW(LogicalCluster(g, {0, 5}, 2, cfg), std::invalid_argument);
    EXPECT_THROW(LogicalCluster(g, {0, 1}, 0, cfg), std::invalid_argument);
    WalkConfig bad = cfg;
    bad.min_len = 10;
    bad.max_len = 5;
    EXPECT_THROW(LogicalCluster(g, {0, 0}, 1, bad), std::invalid_argument);
}

} // namespace
