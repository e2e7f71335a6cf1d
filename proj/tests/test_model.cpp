#include "nccw/model.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nccw;

namespace {

NccwData r1() {
    NccwData d = NccwData::make({2}, {1, 1});
    d.p_labels = {"p"};
    for (int r = 0; r < 2; ++r) d.mult[r][0] = {1, 1};
    return d;
}

}  // namespace

TEST(Validate, R1IsUnitalWithoutGrave) {
    auto rep = validate_nccw(r1());
    ASSERT_TRUE(rep.ok);
    EXPECT_TRUE(rep.unital[0][0]);
    EXPECT_TRUE(rep.unital[1][0]);
    EXPECT_TRUE(rep.injective);
    EXPECT_FALSE(rep.grave.has_value());
}

TEST(Validate, UncoveredBlockBreaksInjectivity) {
    NccwData d = NccwData::make({2}, {1, 1});
    d.mult[0][0] = {2, 0};
    d.mult[1][0] = {2, 0};
    auto rep = validate_nccw(d);
    EXPECT_FALSE(rep.ok);
    EXPECT_FALSE(rep.injective);
    ASSERT_EQ(rep.uncovered.size(), 1u);
    EXPECT_EQ(rep.uncovered[0], 1);
}

TEST(Validate, GraveIndexWhenOnlyOneB1IsShort) {
    NccwData d = NccwData::make({3, 2}, {1});
    d.mult[0][0] = {3};
    d.mult[1][0] = {2};
    d.mult[0][1] = {2};
    d.mult[1][1] = {2};
    auto rep = validate_nccw(d);
    ASSERT_TRUE(rep.ok);
    ASSERT_TRUE(rep.grave.has_value());
    EXPECT_EQ(*rep.grave, 0);
}

TEST(Validate, NoGraveWhenB0IsShortToo) {
    NccwData d = NccwData::make({3}, {1});
    d.mult[0][0] = {2};
    d.mult[1][0] = {2};
    EXPECT_FALSE(validate_nccw(d).grave.has_value());
}

TEST(Validate, OverfullBlockAndNegativeSizesAreReported) {
    NccwData d = NccwData::make({2}, {1});
    d.mult[0][0] = {3};
    d.mult[1][0] = {1};
    EXPECT_FALSE(validate_nccw(d).ok);
    NccwData e = NccwData::make({0}, {1});
    EXPECT_FALSE(validate_nccw(e).ok);
}

TEST(Validate, LayoutCollisionIsReported) {
    NccwData d = r1();
    d.layout = std::array<std::vector<std::vector<int>>, 2>{{{{0, 0}}, {{0, 1}}}};
    auto rep = validate_nccw(d);
    EXPECT_FALSE(rep.ok);
}

TEST(Dualize, R1IsTheIdentityOnTwoPoints) {
    DualData d = dualize(r1());
    EXPECT_EQ(d.ny(), 2);
    EXPECT_EQ(d.nx(), 2);
    EXPECT_EQ(d.b[0], (std::vector<int>{0, 1}));
    EXPECT_EQ(d.b[1], (std::vector<int>{0, 1}));
    EXPECT_TRUE(check_dual(d).empty());
}

TEST(Dualize, NonUnitalEndHasProperDomain) {
    NccwData d = NccwData::make({5}, {2});
    d.mult[0][0] = {2};
    d.mult[1][0] = {1};
    DualData dd = dualize(d);
    int defined = 0;
    for (int y = 0; y < dd.ny(); ++y) defined += dd.b[1][y] >= 0;
    EXPECT_EQ(defined, 2);
}

TEST(Dualize, FibreCountsMatchMultiplicities) {
    std::mt19937_64 rng(5);
    for (int k = 0; k < 200; ++k) {
        NccwData data = oracle::random_data(rng, 10, 6);
        DualData d = dualize(data);
        ASSERT_TRUE(check_dual(d).empty());
        auto m = d.multiplicities();
        for (int r = 0; r < 2; ++r)
            for (int p = 0; p < data.np(); ++p)
                for (int i = 0; i < data.ni(); ++i) {
                    EXPECT_EQ(m[r][p][i], data.mult[r][p][i]);
                    for (int x = d.x_off[i]; x < d.x_off[i + 1]; ++x) {
                        int fib = 0;
                        for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) fib += d.b[r][y] == x;
                        EXPECT_EQ(fib, data.mult[r][p][i]);
                    }
                }
    }
}

TEST(Dualize, RoundTripThroughNccwData) {
    std::mt19937_64 rng(6);
    for (int k = 0; k < 200; ++k) {
        NccwData data = oracle::random_data(rng, 10, 6);
        DualData d = dualize(data);
        NccwData back = to_nccw(d);
        EXPECT_FALSE(back.layout.has_value());
        EXPECT_EQ(back.mult, data.mult);
        EXPECT_EQ(dualize(back), d);
    }
}

TEST(Dualize, ExplicitLayoutRoundTrips) {
    NccwData d = NccwData::make({3}, {1, 2});
    d.mult[0][0] = {1, 1};
    d.mult[1][0] = {1, 1};
    d.layout = std::array<std::vector<std::vector<int>>, 2>{{{{2, 0, 1}}, {{1, 2, 0}}}};
    ASSERT_TRUE(validate_nccw(d).ok);
    DualData dd = dualize(d);
    EXPECT_EQ(dd.b[0], (std::vector<int>{1, 2, 0}));
    NccwData back = to_nccw(dd);
    ASSERT_TRUE(back.layout.has_value());
    EXPECT_EQ(dualize(back), dd);
}

TEST(Twist, CycleNotationRoundTrip) {
    TwistPerm t = TwistPerm::identity(5);
    apply_cycles(t, 0, 5, "(1 3)(2 4 5)");
    EXPECT_EQ(t.map, (std::vector<int>{2, 3, 0, 4, 1}));
    EXPECT_EQ(to_cycles(t, 0, 5), "(1 3)(2 4 5)");
    EXPECT_EQ(t * t.inverse(), TwistPerm::identity(5));
    EXPECT_THROW(apply_cycles(t, 0, 5, "(1 6)"), std::invalid_argument);
    EXPECT_THROW(apply_cycles(t, 0, 5, "(1 1)"), std::invalid_argument);
    EXPECT_THROW(apply_cycles(t, 0, 5, "1 2"), std::invalid_argument);
}

TEST(Twist, BlockPreservation) {
    NccwData data = NccwData::make({2, 2}, {2});
    data.mult[0][0] = data.mult[1][0] = data.mult[0][1] = data.mult[1][1] = {1};
    DualData d = dualize(data);
    TwistPerm t = TwistPerm::identity(4);
    EXPECT_TRUE(t.block_preserving(d));
    t.map = {2, 1, 0, 3};
    EXPECT_FALSE(t.block_preserving(d));
}

TEST(TwistedGraphs, R1WithIdentityHasTwoLoops) {
    DualData d = dualize(r1());
    auto g = twisted_graphs(d, TwistPerm::identity(2));
    ASSERT_EQ(g.size(), 1u);
    ASSERT_EQ(g[0].edges.size(), 2u);
    for (auto& e : g[0].edges) EXPECT_EQ(e.src, e.tgt);
}

TEST(TwistedGraphs, R1WithSwapIsATwoCycle) {
    DualData d = dualize(r1());
    TwistPerm s = TwistPerm::identity(2);
    apply_cycles(s, 0, 2, "(1 2)");
    auto g = twisted_graphs(d, s);
    ASSERT_EQ(g[0].edges.size(), 2u);
    EXPECT_EQ(g[0].edges[0].src, 0);
    EXPECT_EQ(g[0].edges[0].tgt, 1);
    EXPECT_EQ(g[0].edges[1].src, 1);
    EXPECT_EQ(g[0].edges[1].tgt, 0);
}

TEST(TwistedGraphs, TwistThenInverseRestoresTargets) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 100; ++k) {
        DualData d = dualize(oracle::random_data(rng, 8, 5));
        TwistPerm s = oracle::random_twist(d, rng);
        auto g0 = twisted_graphs(d, TwistPerm::identity(d.ny()));
        auto g1 = twisted_graphs(d, s * s.inverse());
        ASSERT_EQ(g0.size(), g1.size());
        for (std::size_t p = 0; p < g0.size(); ++p)
            for (std::size_t e = 0; e < g0[p].edges.size(); ++e) {
                EXPECT_EQ(g0[p].edges[e].src, g1[p].edges[e].src);
                EXPECT_EQ(g0[p].edges[e].tgt, g1[p].edges[e].tgt);
            }
    }
}
