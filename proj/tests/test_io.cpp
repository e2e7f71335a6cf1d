#include "nccw/io.hpp"

#include <gtest/gtest.h>

using namespace nccw;

namespace {

const char* kYaml = R"x(
p_blocks: [{label: p, size: 2}]
i_blocks: [1, 1]
mult:
  - [0, p, i1, 1]
  - [0, p, i2, 1]
  - {r: 1, p: p, i: i1, count: 1}
  - {r: 1, p: 0, i: 1, count: 1}
sigma: {p: "(1 2)"}
)x";

const char* kJson = R"x({
  "p_blocks": [{"label": "p", "size": 2}],
  "i_blocks": [1, 1],
  "mult": [[0, "p", "i1", 1], [0, "p", "i2", 1], [1, "p", "i1", 1], [1, 0, 1, 1]],
  "sigma": {"p": "(1 2)"}
})x";

}  // namespace

TEST(Io, YamlAndJsonAgree) {
    auto a = parse_input_text(kYaml, false), b = parse_input_text(kJson, true);
    EXPECT_EQ(to_json(a.data), to_json(b.data));
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.data.i_labels, (std::vector<std::string>{"i1", "i2"}));
    EXPECT_EQ(a.data.mult[1][0][1], 1);
    EXPECT_TRUE(validate_nccw(a.data).ok);
}

TEST(Io, ExampleFilesAgree) {
    auto a = load_input(std::string(NCCW_SEEDS) + "/r1.yaml");
    auto b = load_input(std::string(NCCW_SEEDS) + "/r1.json");
    EXPECT_EQ(to_json(a.data), to_json(b.data));
    EXPECT_EQ(a.tau.at("p"), "(1 2)");
}

TEST(Io, RoundTripThroughJson) {
    auto a = parse_input_text(kYaml, false);
    auto b = parse_input_json(to_json(a.data));
    EXPECT_EQ(to_json(a.data), to_json(b.data));
}

TEST(Io, MalformedInputs) {
    const char* bad[] = {
        "r: 2",
        "p_blocks: [2]\ni_blocks: [1]\nmult: [[2, 0, 0, 1]]",
        "p_blocks: [2]\ni_blocks: [1]\nmult: [[0, q, 0, 1]]",
        "p_blocks: [2]\ni_blocks: [1]\nmult: [[0, 0, 0, -1]]",
        "p_blocks: [2]\ni_blocks: [1]\nmult: [[0, 0, 0]]",
        "p_blocks: [{label: a, size: 1}, {label: a, size: 1}]\ni_blocks: [1]\nmult: []",
        "p_blocks: [2]\ni_blocks: [1]\nmult: []\nlayout: {r0: [[0]]}",
        "p_blocks: [2\n",
        "[1, 2]",
    };
    for (const char* text : bad) EXPECT_THROW(parse_input_text(text, false), ParseError) << text;
    EXPECT_THROW(parse_input_text("{\"p_blocks\": ", true), ParseError);
    EXPECT_THROW(load_input("/nonexistent/file.yaml"), ParseError);
}

TEST(Io, TwistArguments) {
    auto doc = parse_input_text(kYaml, false);
    EXPECT_EQ(parse_twist_arg(doc.data, "(1 2)"), (std::map<std::string, std::string>{{"p", "(1 2)"}}));
    EXPECT_EQ(parse_twist_arg(doc.data, "p:(1 2)"), (std::map<std::string, std::string>{{"p", "(1 2)"}}));
    EXPECT_TRUE(parse_twist_arg(doc.data, "id").empty());
    EXPECT_TRUE(parse_twist_arg(doc.data, "").empty());
    EXPECT_THROW(parse_twist_arg(doc.data, "q:(1 2)"), ParseError);
    TwistPerm t = make_twist(doc.data, {{"p", "(1 2)"}});
    EXPECT_EQ(t.map, (std::vector<int>{1, 0}));
    EXPECT_THROW(make_twist(doc.data, {{"p", "(1 3)"}}), ParseError);
}

TEST(Io, LabelsNeededWithSeveralBlocks) {
    auto doc = load_input(std::string(NCCW_SEEDS) + "/conn.yaml");
    EXPECT_THROW(parse_twist_arg(doc.data, "(1 2)"), ParseError);
    EXPECT_EQ(parse_twist_arg(doc.data, "p1:(1 2);p2:()").size(), 2u);
}

TEST(Io, TowerSections) {
    auto conn = load_input(std::string(NCCW_SEEDS) + "/conn.yaml");
    ASSERT_TRUE(conn.tower);
    EXPECT_EQ(conn.tower->family.mod, Modification::Conn);
    EXPECT_EQ(conn.tower->family.rule.nq, 2);
    EXPECT_EQ(conn.tower->twist_block, 0);
    EXPECT_EQ(conn.tower->zcell, 0);
    EXPECT_EQ(conn.tower->family.rule.base[idx(Kind::Rev)], 1);

    auto nop = load_input(std::string(NCCW_SEEDS) + "/nop.yaml");
    ASSERT_TRUE(nop.tower);
    EXPECT_EQ(nop.tower->family.toggles, all_path_toggles());
    EXPECT_EQ(nop.tower->family.rule.base, nop_family().rule.base);

    auto spl = load_input(std::string(NCCW_SEEDS) + "/spl.yaml");
    ASSERT_TRUE(spl.tower);
    EXPECT_EQ(spl.tower->family.flavor, Flavor::Projectionless);
    ASSERT_TRUE(spl.tower->family.rule.grave_counts);

    auto sccb = load_input(std::string(NCCW_SEEDS) + "/sccb.yaml");
    ASSERT_TRUE(sccb.tower);
    EXPECT_TRUE(sccb.tower->family.toggles & kSccb);
    EXPECT_EQ(sccb.tower->family.m_seq, (std::vector<int>{1, 0, 0, 0}));

    const char* bad_kind = "p_blocks: [2]\ni_blocks: [1]\nmult: [[0,0,0,2],[1,0,0,2]]\ntower: {rule: {sideways: 1}}";
    EXPECT_THROW(parse_input_text(bad_kind, false), ParseError);
    const char* bad_toggle = "p_blocks: [2]\ni_blocks: [1]\nmult: [[0,0,0,2],[1,0,0,2]]\ntower: {rule: {}, toggles: [nop9]}";
    EXPECT_THROW(parse_input_text(bad_toggle, false), ParseError);
}

TEST(Io, Lists) {
    EXPECT_EQ(parse_int_list("1, 0,3"), (std::vector<int>{1, 0, 3}));
    EXPECT_THROW(parse_int_list("1,,2"), ParseError);
    EXPECT_THROW(parse_int_list("1,x"), ParseError);
    EXPECT_EQ(parse_toggles("nop1,clsg"), kNop1 | kClsg);
    EXPECT_THROW(parse_toggles("nop1,bogus"), ParseError);
}

TEST(Io, CertificateJsonHasAllComponents) {
    auto doc = load_input(std::string(NCCW_SEEDS) + "/r1.yaml");
    auto t = make_twist(doc.data, doc.tau);
    auto dec = decide_conjugacy(doc.data, t, t);
    ASSERT_EQ(dec.verdict, Verdict::Conjugate);
    json j = to_json(dec);
    EXPECT_EQ(j["verdict"], "Conjugate");
    for (const char* k : {"rho", "kappa", "o", "Theta", "Xi"}) EXPECT_TRUE(j["certificate"].contains(k)) << k;
}
