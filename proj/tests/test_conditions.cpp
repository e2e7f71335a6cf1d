#include "nccw/conditions.hpp"

#include <gtest/gtest.h>

#include <set>

using namespace nccw;

TEST(Conditions, AllTogglePathTowerPasses) {
    Tower t = build_tower(nop_seed(), nop_family(), 3);
    auto reps = check_tower(t);
    ASSERT_EQ(reps.size(), 2u);
    for (auto& r : reps) {
        EXPECT_TRUE(r.ok());
        for (auto& e : r.entries)
            if (e.applicable) {
                EXPECT_TRUE(e.witness.empty()) << e.name;
            }
    }
}

TEST(Conditions, EveryToggleIsChecked) {
    Tower t = build_tower(nop_seed(), nop_family(), 2);
    auto rep = check_conditions(t.level(1), t.level(2), t.specs[0], t.family.toggles);
    for (const char* name : {"nlc1", "nlc2", "nop1", "nop2", "clsg", "np4ni"}) {
        auto* e = rep.find(name);
        ASSERT_NE(e, nullptr) << name;
        EXPECT_TRUE(e->applicable) << name;
    }
}

TEST(Conditions, UntoggledConditionsAreNotApplicable) {
    Tower t = build_tower(nop_seed(), nop_family(), 2);
    auto rep = check_conditions(t.level(1), t.level(2), t.specs[0], 0);
    for (auto& e : rep.entries)
        if (e.name == "nop1" || e.name == "clsg") {
            EXPECT_FALSE(e.applicable) << e.name;
        }
}

TEST(Conditions, SccbAndGraveTowersPass) {
    Tower s = build_tower(sccb_seed(), sccb_family({1, 0, 0}), 3);
    for (auto& r : check_tower(s)) EXPECT_TRUE(r.ok()) << (r.failing().empty() ? "" : r.failing()[0]);
    Tower g = build_tower(spl_seed(), spl_family(), 3);
    for (auto& r : check_tower(g)) EXPECT_TRUE(r.ok()) << (r.failing().empty() ? "" : r.failing()[0]);
}

class Mutation : public ::testing::TestWithParam<int> {};

TEST_P(Mutation, BreaksExactlyItsTarget) {
    auto cases = mutation_cases();
    const auto& c = cases.at(GetParam());
    auto out = run_mutation(c);
    auto f = out.report.failing();
    EXPECT_TRUE(out.exact()) << c.target << " failing: " << (f.empty() ? "none" : f[0]) << " (" << f.size() << ")";
    if (auto* e = out.report.find(c.target)) {
        EXPECT_FALSE(e->witness.empty());
    }
}

INSTANTIATE_TEST_SUITE_P(Conditions, Mutation, ::testing::Range(0, 6), [](const auto& info) {
    return mutation_cases().at(info.param).target;
});

TEST(Conditions, MutationTargetsCoverAllToggles) {
    std::set<std::string> got;
    for (auto& c : mutation_cases()) got.insert(c.target);
    EXPECT_EQ(got, (std::set<std::string>{"nlc1", "nlc2", "nop1", "nop2", "clsg", "np4ni"}));
}
