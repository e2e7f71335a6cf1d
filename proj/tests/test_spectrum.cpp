#include "nccw/spectrum.hpp"

#include "oracle.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace nccw;

namespace {

TopGraph graph(int nv, const std::vector<std::pair<int, int>>& edges) {
    TopGraph g;
    for (int v = 0; v < nv; ++v) g.vertices.push_back({VertexKind::Anonymous, "v" + std::to_string(v), -1});
    for (auto [u, v] : edges) g.edges.push_back({u, v, "", 0});
    return g;
}

TopGraph k33() {
    std::vector<std::pair<int, int>> e;
    for (int a = 0; a < 3; ++a)
        for (int c = 3; c < 6; ++c) e.push_back({a, c});
    return graph(6, e);
}

// Replace each edge by a path of random length.
TopGraph subdivide(const TopGraph& g, std::mt19937_64& rng) {
    TopGraph h;
    h.vertices = g.vertices;
    for (auto& e : g.edges) {
        int k = std::uniform_int_distribution<int>(0, 2)(rng);
        int prev = e.u;
        for (int s = 0; s < k; ++s) {
            int v = h.nv();
            h.vertices.push_back({VertexKind::Anonymous, "s", -1});
            h.edges.push_back({prev, v, "", e.block});
            prev = v;
        }
        h.edges.push_back({prev, e.v, "", e.block});
    }
    return h;
}

NccwData r1() {
    NccwData d = NccwData::make({2}, {1, 1});
    for (int r = 0; r < 2; ++r) d.mult[r][0] = {1, 1};
    return d;
}

}  // namespace

TEST(SpecB, R1LoopsAndTwoCycle) {
    DualData d = dualize(r1());
    auto a = analyze(spec_b(d));
    EXPECT_EQ(a.pi0, 2);
    EXPECT_TRUE(a.cut_vertices.empty());
    TwistPerm s = TwistPerm::identity(2);
    apply_cycles(s, 0, 2, "(1 2)");
    TopGraph g = spec_b(d, s);
    EXPECT_EQ(analyze(g).pi0, 1);
    EXPECT_EQ(g.ne(), 2);
    TopGraph circle = graph(1, {{0, 0}});
    EXPECT_TRUE(graph_homeomorphic(g, circle).homeomorphic);
}

TEST(SpecB, GraveDataHasFreeEnds) {
    NccwData data = NccwData::make({3}, {1});
    data.mult[0][0] = {3};
    data.mult[1][0] = {2};
    EXPECT_GE(spec_b(dualize(data)).free_ends(), 1);
}

TEST(SpecB, EdgeAndFreeEndCounts) {
    std::mt19937_64 rng(31);
    for (int k = 0; k < 200; ++k) {
        NccwData data = oracle::random_data(rng, 10, 6);
        DualData d = dualize(data);
        TopGraph g = spec_b(d, oracle::random_twist(d, rng));
        EXPECT_EQ(g.ne(), d.ny());
        int missing = 0;
        for (int r = 0; r < 2; ++r)
            for (int y = 0; y < d.ny(); ++y) missing += d.b[r][y] < 0;
        EXPECT_EQ(g.free_ends(), missing);
    }
}

TEST(Analyze, SmallGraphs) {
    EXPECT_EQ(analyze(graph(2, {{0, 0}, {1, 1}})).pi0, 2);
    auto path = analyze(graph(3, {{0, 1}, {1, 2}}));
    EXPECT_EQ(path.pi0, 1);
    EXPECT_EQ(path.cut_vertices, std::vector<int>{1});
    auto two = analyze(graph(2, {{0, 1}, {0, 1}}));
    EXPECT_TRUE(two.cut_vertices.empty());
    EXPECT_EQ(two.betti1, 1);
    // a free end hangs a pendant on its vertex
    TopGraph h = graph(2, {{0, 1}, {1, 1}});
    h.edges.push_back({0, -1, "", 0});
    EXPECT_EQ(analyze(h).cut_vertices, (std::vector<int>{0, 1}));
}

TEST(Homeomorphic, CircleSubdivisionsAndComponents) {
    EXPECT_TRUE(graph_homeomorphic(graph(1, {{0, 0}}), graph(2, {{0, 1}, {1, 0}})).homeomorphic);
    EXPECT_FALSE(graph_homeomorphic(graph(2, {{0, 0}, {1, 1}}), graph(1, {{0, 0}})).homeomorphic);
    EXPECT_FALSE(graph_homeomorphic(k33(), graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}})).homeomorphic);
}

TEST(Homeomorphic, InvariantUnderRandomSubdivision) {
    std::mt19937_64 rng(32);
    for (int k = 0; k < 100; ++k) {
        DualData d = dualize(oracle::random_data(rng, 10, 6));
        TopGraph g = spec_b(d, oracle::random_twist(d, rng));
        TopGraph h = subdivide(g, rng);
        EXPECT_TRUE(graph_homeomorphic(g, h).homeomorphic);
        EXPECT_TRUE(graph_homeomorphic(h, g).homeomorphic);
        EXPECT_TRUE(graph_homeomorphic(g, g).homeomorphic);
    }
}

TEST(Homeomorphic, FreeEndsMatter) {
    TopGraph a = graph(1, {{0, 0}});
    TopGraph b = a;
    b.edges.push_back({0, -1, "", 0});
    EXPECT_FALSE(graph_homeomorphic(a, b).homeomorphic);
    TopGraph c = graph(1, {{0, 0}});
    c.edges.push_back({-1, 0, "", 0});
    EXPECT_TRUE(graph_homeomorphic(b, c).homeomorphic);
}

TEST(K33, FoundOnK33AndSubdivisions) {
    auto r = find_k33(k33());
    ASSERT_EQ(r.status, K33Status::Found);
    std::string why;
    EXPECT_TRUE(verify_k33(k33(), *r.witness, &why)) << why;
    std::mt19937_64 rng(33);
    for (int k = 0; k < 10; ++k) {
        TopGraph h = subdivide(k33(), rng);
        auto s = find_k33(h);
        ASSERT_EQ(s.status, K33Status::Found);
        EXPECT_TRUE(verify_k33(h, *s.witness));
    }
}

TEST(K33, AbsentOnPlanarGraphs) {
    TopGraph k4 = graph(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}});
    EXPECT_EQ(find_k33(k4).status, K33Status::Absent);
    // the 3-prism is planar with six vertices of degree three
    TopGraph prism = graph(6, {{0, 1}, {1, 2}, {2, 0}, {3, 4}, {4, 5}, {5, 3}, {0, 3}, {1, 4}, {2, 5}});
    EXPECT_EQ(find_k33(prism).status, K33Status::Absent);
    // wheel with five spokes
    TopGraph wheel = graph(6, {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {0, 5}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 1}});
    EXPECT_EQ(find_k33(wheel).status, K33Status::Absent);
}

TEST(K33, TamperedWitnessFailsVerification) {
    auto r = find_k33(k33());
    ASSERT_TRUE(r.witness);
    K33Witness w = *r.witness;
    w.paths[0][0] = w.paths[0][1];
    EXPECT_FALSE(verify_k33(k33(), w));
}

TEST(K33, BudgetGivesInconclusive) {
    TopGraph big = k33();
    EXPECT_EQ(find_k33(big, 1).status, K33Status::Inconclusive);
}

TEST(Dot, ExportMarksFreeEnds) {
    TopGraph g = graph(1, {{0, 0}});
    g.edges.push_back({0, -1, "y", 0});
    std::string dot = to_dot(g);
    EXPECT_NE(dot.find("graph spectrum"), std::string::npos);
    EXPECT_NE(dot.find("free"), std::string::npos);
}
