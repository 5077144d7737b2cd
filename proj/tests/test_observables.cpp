#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "bfw/engine.hpp"
#include "bfw/observables.hpp"

namespace {

using bfw::ComponentPartition;
using bfw::TraceRecord;
using u64 = std::uint64_t;

// Partition of n nodes whose components have the given sizes (sum may be < n; the rest stay singletons).
ComponentPartition<> with_sizes(u64 n, const std::vector<u64>& sizes) {
    ComponentPartition<> p(n);
    std::uint32_t next = 0;
    for (u64 s : sizes) {
        const std::uint32_t first = next;
        for (u64 i = 1; i < s; ++i) p.merge(first, first + static_cast<std::uint32_t>(i));
        next += static_cast<std::uint32_t>(s);
    }
    return p;
}

// Ordered node pairs (self-pairs included) by case, enumerated node by node.
bfw::CaseCounts brute_node_pairs(const ComponentPartition<>& p, u64 k) {
    const u64 n = p.node_count();
    std::vector<std::uint32_t> root(n);
    std::vector<u64> size(n);
    // Roots by walking parents on a copy; find() compresses paths.
    ComponentPartition<> q = p;
    for (std::uint32_t v = 0; v < n; ++v) {
        root[v] = q.find(v);
        size[v] = q.root_size(root[v]);
    }
    bfw::CaseCounts c;
    for (u64 i = 0; i < n; ++i)
        for (u64 j = 0; j < n; ++j) {
            if (root[i] == root[j])
                ++c.same;
            else if (size[i] + size[j] <= k)
                ++c.small;
            else
                ++c.big;
        }
    return c;
}

// Same counts from an enumeration of component pairs.
bfw::CaseCounts brute_component_pairs(const std::vector<u64>& sizes, u64 k) {
    bfw::CaseCounts c;
    for (std::size_t i = 0; i < sizes.size(); ++i)
        for (std::size_t j = 0; j < sizes.size(); ++j) {
            const u64 w = sizes[i] * sizes[j];
            if (i == j)
                c.same += w;
            else if (sizes[i] + sizes[j] <= k)
                c.small += w;
            else
                c.big += w;
        }
    return c;
}

void expect_counts_eq(const bfw::CaseCounts& a, const bfw::CaseCounts& b) {
    EXPECT_EQ(a.same, b.same);
    EXPECT_EQ(a.small, b.small);
    EXPECT_EQ(a.big, b.big);
}

// ---------------------------------------------------------------------------
// P1, P2

TEST(P1, Examples) {
    auto whole = with_sizes(10, {10});
    EXPECT_DOUBLE_EQ(bfw::p1(whole), 1.0);
    auto two = with_sizes(10, {3, 7});
    EXPECT_DOUBLE_EQ(bfw::p1(two), 0.58);
    ComponentPartition<> fresh(10);
    EXPECT_DOUBLE_EQ(bfw::p1(fresh), 0.1);
    EXPECT_DOUBLE_EQ(bfw::p1(fresh.size_index()), 0.1);
}

TEST(P1, TopVariantTruncates) {
    auto p = with_sizes(1000, {300, 200});
    const double full = bfw::p1(p);
    EXPECT_DOUBLE_EQ(bfw::p1_top(p.size_index(), 100), 0.09 + 0.04 + 98 * 1e-6);
    EXPECT_DOUBLE_EQ(bfw::p1_top(p.size_index(), 2), 0.13);
    EXPECT_GT(full, bfw::p1_top(p.size_index(), 100));
}

TEST(P2, Examples) {
    auto p = with_sizes(10, {2, 3, 5});
    EXPECT_DOUBLE_EQ(bfw::p2(p, 5), 0.12);
    auto whole = with_sizes(10, {10});
    EXPECT_EQ(bfw::p2(whole, 100), 0.0);
    auto q = with_sizes(50, {7, 12, 3});
    EXPECT_DOUBLE_EQ(bfw::p2(q, 50), 1.0 - bfw::p1(q));
}

TEST(P2, ZeroPredicateMatchesDefinition) {
    for (u64 k = 2; k <= 30; ++k) {
        auto p = with_sizes(40, {9, 9, 11, 8});  // plus 3 singletons
        const bool zero = bfw::p2(p, k) == 0.0;
        EXPECT_EQ(bfw::p2_is_zero(p.size_index(), k), zero) << k;
    }
    auto q = with_sizes(20, {10, 10});
    EXPECT_TRUE(bfw::p2_is_zero(q.size_index(), 19));
    EXPECT_FALSE(bfw::p2_is_zero(q.size_index(), 20));
    auto one = with_sizes(5, {5});
    EXPECT_TRUE(bfw::p2_is_zero(one.size_index(), 100));
}

TEST(CaseCounts, MatchNodePairEnumeration) {
    auto p = with_sizes(60, {10, 7, 7, 5, 3, 3, 2});
    for (u64 k : {0ull, 1ull, 2ull, 4ull, 6ull, 10ull, 14ull, 17ull, 60ull, 1000ull}) {
        const auto c = bfw::case_counts(p.size_index(), k);
        expect_counts_eq(c, brute_node_pairs(p, k));
        EXPECT_EQ(c.same + c.small + c.big, 3600u);
    }
}

// Every sampling instant of full runs: fast P1/P2 equal brute-force enumeration
// and the three cases partition all n^2 ordered pairs exactly.
class ObservablesOracle : public ::testing::TestWithParam<std::tuple<u64, double>> {};

TEST_P(ObservablesOracle, SampledObservablesMatchBruteForce) {
    const auto [n, alpha] = GetParam();
    bfw::EngineConfig cfg;
    cfg.alpha = alpha;
    cfg.node_count = n;
    cfg.seed = 1234;
    bfw::Engine engine(cfg);
    const u64 stride = n <= 200 ? 7 : 25;
    u64 checks = 0;
    while (true) {
        const auto& part = engine.state().partition;
        const u64 k = engine.state().k;
        const auto rec = engine.observe();
        const auto fast = bfw::case_counts(part.size_index(), k);
        const auto sizes = part.component_sizes();
        const auto brute = n <= 200 ? brute_node_pairs(part, k) : brute_component_pairs(sizes, k);
        expect_counts_eq(fast, brute);
        ASSERT_EQ(fast.same + fast.small + fast.big, n * n);

        u64 sq = 0;
        for (u64 s : sizes) sq += s * s;
        const double nn = static_cast<double>(n * n);
        EXPECT_EQ(rec.p1, static_cast<double>(sq) / nn);
        EXPECT_EQ(rec.p2, static_cast<double>(brute.small) / nn);
        EXPECT_EQ(rec.component_count, sizes.size());
        EXPECT_LE(rec.p1 + rec.p2, 1.0 + 1e-15);
        EXPECT_TRUE(std::is_sorted(rec.top_sizes.rbegin(), rec.top_sizes.rend()));
        double top_sq = 0.0;
        for (double c : rec.top_sizes) top_sq += c * c;
        EXPECT_GE(rec.p1 + 1e-15, top_sq);
        ++checks;

        if (engine.finished()) break;
        for (u64 i = 0; i < stride && !engine.finished(); ++i) engine.step();
    }
    EXPECT_GT(checks, 10u);
}

INSTANTIATE_TEST_SUITE_P(FullRuns, ObservablesOracle,
                         ::testing::Combine(::testing::Values<u64>(50, 200, 1000),
                                            ::testing::Values(0.2, 0.3, 0.5, 0.9)));

// ---------------------------------------------------------------------------
// Giant set

TEST(GiantSet, StrictBounds) {
    auto p = with_sizes(105, {60, 40, 5});
    EXPECT_EQ(bfw::giant_set(p.size_index(), 100), (std::vector<double>{60.0 / 105}));
    ComponentPartition<> fresh(10);
    EXPECT_TRUE(bfw::giant_set(fresh.size_index(), 2).empty());
    auto q = with_sizes(100, {50, 50});
    EXPECT_TRUE(bfw::giant_set(q.size_index(), 100).empty());
    EXPECT_EQ(bfw::giant_set(q.size_index(), 99).size(), 2u);
}

TEST(GiantSet, RecordVariantAgrees) {
    auto p = with_sizes(200, {60, 45, 41, 30, 10});
    const auto rec = bfw::observe(p, 1, 1, 90, 10);
    EXPECT_EQ(bfw::giant_set(rec, 200), bfw::giant_set(p.size_index(), 90));
    EXPECT_EQ(bfw::giant_set(rec, 200), (std::vector<double>{0.3}));  // 45 sits on k/2
}

// ---------------------------------------------------------------------------
// Steady state

TraceRecord record(u64 u, u64 k, std::vector<double> top, double p1, double p2, u64 count) {
    return TraceRecord{u, u, k, std::move(top), p1, p2, count};
}

TEST(SteadyState, AbsentWhenP1NeverExceedsAlpha) {
    std::vector<TraceRecord> trace;
    for (u64 u = 1; u <= 100; ++u) trace.push_back(record(u, 50, {0.3, 0.2}, 0.13, 0.0, 2));
    EXPECT_FALSE(bfw::detect_steady_state(trace, 100, 0.5, 10));
    EXPECT_THROW(bfw::detect_steady_state(trace, 100, 0.5, 0), bfw::ConfigError);
}

TEST(SteadyState, FindsFirstRecordOfFinalStableStretch) {
    // n = 100: giants 55 and 44 plus one singleton; k = 60 blocks their merge.
    std::vector<TraceRecord> trace;
    trace.push_back(record(1, 2, {0.01, 0.01}, 0.01, 0.99, 100));
    trace.push_back(record(10, 60, {0.55, 0.44, 0.01}, 0.4962, 0.0088, 3));  // P1 below alpha
    trace.push_back(record(20, 60, {0.55, 0.44, 0.01}, 0.5121, 0.0088, 3));
    trace.push_back(record(30, 60, {0.55, 0.44, 0.01}, 0.5121, 0.0088, 3));
    trace.push_back(record(40, 60, {0.55, 0.44, 0.01}, 0.5121, 0.0088, 3));
    const auto rep = bfw::detect_steady_state(trace, 100, 0.5, 20);
    ASSERT_TRUE(rep);
    EXPECT_EQ(rep->detected_at_u, 20u);
    EXPECT_EQ(rep->detected_index, 2u);
    EXPECT_EQ(rep->stable_window, 20u);
    EXPECT_EQ(rep->m, 2);
    EXPECT_EQ(rep->fractions, (std::vector<double>{0.55, 0.44}));
    EXPECT_DOUBLE_EQ(rep->x, 0.99);
    EXPECT_DOUBLE_EQ(rep->p1_final, 0.5121);
    // The stretch is too short for a longer window.
    EXPECT_FALSE(bfw::detect_steady_state(trace, 100, 0.5, 21));
}

TEST(SteadyState, MergeableGiantsBreakTheStretch) {
    std::vector<TraceRecord> trace;
    trace.push_back(record(10, 99, {0.55, 0.44, 0.01}, 0.5122, 0.0, 3));  // 55 + 44 <= 99
    trace.push_back(record(20, 99, {0.56, 0.44}, 0.5072, 0.0, 2));
    trace.push_back(record(30, 99, {0.56, 0.44}, 0.5072, 0.0, 2));
    const auto rep = bfw::detect_steady_state(trace, 100, 0.5, 1);
    ASSERT_TRUE(rep);
    EXPECT_EQ(rep->detected_at_u, 20u);
}

TEST(SteadyState, UnseenGiantsAreNotAssumedBlocked) {
    // Top-2 list full of giants while more components exist: cannot decide.
    const auto rec = record(10, 50, {0.3, 0.3}, 0.6, 0.0, 4);
    EXPECT_FALSE(bfw::giants_blocked(rec, 100));
    const auto seen = record(10, 50, {0.3, 0.3, 0.005}, 0.6, 0.0, 4);
    EXPECT_TRUE(bfw::giants_blocked(seen, 100));
}

bfw::RunResult simulate(double alpha, u64 n, u64 seed, bool merges = false) {
    bfw::EngineConfig cfg;
    cfg.alpha = alpha;
    cfg.node_count = n;
    cfg.seed = seed;
    cfg.sample_every = merges ? n : 1000;
    cfg.record_merges = merges;
    return bfw::run(cfg);
}

TEST(SteadyState, ThreeGiantsAtOneThird) {
    const auto run = simulate(1.0 / 3, 100000, 7);
    const auto rep = bfw::detect_steady_state(run.trace, 100000, 1.0 / 3, 10000);
    ASSERT_TRUE(rep);
    ASSERT_EQ(rep->m, 3);
    EXPECT_NEAR(rep->fractions[0], 0.414, 0.03);
    EXPECT_NEAR(rep->fractions[1], 0.322, 0.03);
    EXPECT_NEAR(rep->fractions[2], 0.263, 0.03);
    EXPECT_GT(rep->p1_final, 1.0 / 3);
    EXPECT_LE(rep->x, 1.0);
    // Any two giants would exceed the stage.
    const u64 k = run.trace.back().k;
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            EXPECT_GT(std::llround(1e5 * rep->fractions[i]) + std::llround(1e5 * rep->fractions[j]),
                      static_cast<long long>(k));
}

TEST(SteadyState, SumOfSquaresAboveAlphaAtOneHalf) {
    const auto run = simulate(0.5, 100000, 3);
    const auto rep = bfw::detect_steady_state(run.trace, 100000, 0.5, 10000);
    ASSERT_TRUE(rep);
    EXPECT_EQ(rep->m, 2);
    EXPECT_GT(rep->sum_sq(), 0.5);
    EXPECT_NEAR(rep->sum_sq(), 0.5007, 0.02);
}

// ---------------------------------------------------------------------------
// Jumps

TEST(Jump, SyntheticTwoMinimumMerge) {
    // n = 100, k = 40: S = {35, 30, 25}; the two smallest, 30 and 25, become 55.
    std::vector<TraceRecord> trace;
    trace.push_back(record(1, 40, {0.35, 0.30, 0.25, 0.05}, 0.0, 0.0, 6));
    trace.push_back(record(2, 55, {0.55, 0.35, 0.05}, 0.0, 0.0, 5));
    const auto ev = bfw::detect_jump(trace, 100);
    ASSERT_TRUE(ev);
    EXPECT_EQ(ev->u_at_jump, 2u);
    EXPECT_NEAR(ev->delta_cmax, 0.20, 1e-12);
    EXPECT_DOUBLE_EQ(ev->after_size, 0.55);
    EXPECT_EQ(ev->set_s.before_sizes, (std::vector<double>{0.30, 0.25}));
    EXPECT_TRUE(ev->set_s.two_minimum_merge);
    EXPECT_TRUE(ev->set_s.others_unchanged);
    EXPECT_EQ(ev->k_before, 40u);
}

TEST(Jump, OtherMergeIsFlagged) {
    std::vector<TraceRecord> trace;
    trace.push_back(record(1, 40, {0.35, 0.30, 0.25, 0.05}, 0.0, 0.0, 6));
    trace.push_back(record(2, 65, {0.65, 0.25, 0.05}, 0.0, 0.0, 5));  // 35 + 30
    const auto ev = bfw::detect_jump(trace, 100);
    ASSERT_TRUE(ev);
    EXPECT_FALSE(ev->set_s.two_minimum_merge);
    EXPECT_FALSE(ev->set_s.others_unchanged);
}

TEST(Jump, SmoothTraceHasNone) {
    std::vector<TraceRecord> trace;
    for (u64 u = 1; u <= 100; ++u) trace.push_back(record(u, 100, {0.01 * static_cast<double>(u) / 2}, 0.0, 0.0, 1));
    EXPECT_FALSE(bfw::detect_jump(trace, 1000));
}

TEST(Jump, LargestJumpAtOneHalfMergesTheTwoSmallestGiants) {
    const auto run = simulate(0.5, 100000, 11, true);
    const auto ev = bfw::detect_jump(run.trace, 100000);
    ASSERT_TRUE(ev);
    EXPECT_GT(ev->delta_cmax, 0.05);
    EXPECT_TRUE(ev->giants.two_minimum_merge);
    EXPECT_TRUE(ev->giants.others_unchanged);
}

}  // namespace
