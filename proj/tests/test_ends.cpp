#include "nccw/ends.hpp"

#include <gtest/gtest.h>

using namespace nccw;

TEST(Ends, GraveTowerIsCantorBranching) {
    Tower t = build_tower(spl_seed(), spl_family(), 6);
    auto tree = ends_tree(t, 6);
    ASSERT_EQ(tree.levels.size(), 6u);
    EXPECT_TRUE(tree.cantor_branching());
    EXPECT_GE(tree.min_branching, 2);
    EXPECT_TRUE(tree.counts_match());
    std::vector<long> counts;
    for (auto& l : tree.levels) counts.push_back(static_cast<long>(l.nodes.size()));
    EXPECT_EQ(counts, (std::vector<long>{1, 2, 4, 8, 16, 32}));
}

TEST(Ends, ParentsLieBelow) {
    Tower t = build_tower(spl_seed(), spl_family(), 4);
    auto tree = ends_tree(t, 4);
    for (std::size_t n = 1; n < tree.levels.size(); ++n) {
        const auto& lv = tree.levels[n];
        const auto& prev = tree.levels[n - 1];
        const Stage& st = t.level(static_cast<int>(n) + 1);
        for (std::size_t k = 0; k < lv.nodes.size(); ++k) {
            ASSERT_GE(lv.parent[k], 0);
            EXPECT_EQ(st.slot_origin[lv.nodes[k]].ref, prev.nodes[lv.parent[k]]);
        }
    }
}

TEST(Ends, DepthOneHasNoBranching) {
    Tower t = build_tower(spl_seed(), spl_family(), 1);
    auto tree = ends_tree(t, 1);
    EXPECT_EQ(tree.levels.size(), 1u);
    EXPECT_FALSE(tree.cantor_branching());
}

TEST(Ends, UnitalTowerHasNoFreeEnds) {
    Tower t = build_tower(nop_seed(), nop_family(), 2);
    EXPECT_THROW(ends_tree(t, 2), EndsError);
}

TEST(Invariants, StrictlyGrowing) {
    Tower t = build_tower(sccb_seed(), sccb_family({1, 0, 0, 0}), 4);
    auto seq = invariant_sequence(t, 4);
    ASSERT_EQ(seq.size(), 4u);
    EXPECT_TRUE(strictly_growing(seq));
    EXPECT_EQ(seq[0], std::vector<int>{6});
    EXPECT_FALSE(strictly_growing({{3}, {3}}));
    EXPECT_TRUE(strictly_growing({{3, 4}, {5, 9}}));
    EXPECT_FALSE(strictly_growing({{3, 6}, {5, 9}}));
}

TEST(Invariants, CompareFirstLevel) {
    Tower a = build_tower(sccb_seed(), sccb_family({1, 0, 0}), 3);
    Tower b = build_tower(sccb_seed(), sccb_family({2, 0, 0}), 3);
    auto r = compare_towers(a, b, 3);
    ASSERT_TRUE(std::holds_alternative<Distinguished>(r));
    auto d = std::get<Distinguished>(r);
    EXPECT_EQ(d.level, 1);
    EXPECT_EQ(d.value, 6);
    EXPECT_EQ(d.smaller, 0);
}

TEST(Invariants, CompareThirdLevel) {
    Tower a = build_tower(sccb_seed(), sccb_family({1, 0, 0, 0}), 4);
    Tower b = build_tower(sccb_seed(), sccb_family({1, 0, 3, 0}), 4);
    auto r = compare_towers(b, a, 4);
    ASSERT_TRUE(std::holds_alternative<Distinguished>(r));
    auto d = std::get<Distinguished>(r);
    EXPECT_EQ(d.level, 3);
    EXPECT_EQ(d.value, 1424);
    EXPECT_EQ(d.smaller, 1);
}

TEST(Invariants, IdenticalSequencesAreIndistinguishable) {
    Tower a = build_tower(sccb_seed(), sccb_family({1, 0, 0}), 3);
    Tower b = build_tower(sccb_seed(), sccb_family({1, 0, 0}), 3);
    auto r = compare_towers(a, b, 3);
    ASSERT_TRUE(std::holds_alternative<IndistinguishableToDepth>(r));
    EXPECT_EQ(std::get<IndistinguishableToDepth>(r).depth, 3);
}

TEST(Census, CountsAndDegrees) {
    Tower t = build_tower(sccb_seed(), sccb_family({1, 0, 0, 0}), 3);
    auto c = bisection_census(t, 3);
    ASSERT_EQ(c.size(), 3u);
    EXPECT_EQ(c[0].count, 30);
    EXPECT_EQ(c[1].count, 7808);
    EXPECT_EQ(c[2].count, 1908032);
    EXPECT_EQ(c[1].degree, 92);
    for (auto& e : c)
        for (auto [y, z] : e.examples) EXPECT_NE(y, z);
}

TEST(Census, MatchesBruteForce) {
    Tower t = build_tower(nop_seed(), nop_family(), 2);
    const DualData& d = t.level(2).d;
    long brute = 0;
    for (int y = 0; y < d.ny(); ++y)
        for (int z = 0; z < d.ny(); ++z) {
            if (y == z) continue;
            bool split0 = d.i_of(d.b[0][y]) != d.i_of(d.b[0][z]) || d.slot[0][y] != d.slot[0][z];
            bool split1 = d.i_of(d.b[1][y]) != d.i_of(d.b[1][z]) || d.slot[1][y] != d.slot[1][z];
            brute += split0 && split1;
        }
    EXPECT_EQ(bisection_census(t, 2)[1].count, brute);
}
