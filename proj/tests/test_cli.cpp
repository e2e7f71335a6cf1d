// Runs the command-line tool end to end and checks exit codes and artifacts.

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

fs::path scratch() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("nccw_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run(const std::string& args) {
    static int counter = 0;
    fs::path log = scratch() / ("stdout" + std::to_string(counter++) + ".txt");
    std::string cmd = std::string("\"") + NCCW_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string seed(const std::string& name) { return std::string("\"") + NCCW_SEEDS + "/" + name + "\""; }

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST(Cli, Validate) {
    auto r = run("validate --input " + seed("r1.yaml"));
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(run("validate --input " + seed("malformed.yaml")).code, 2);
    EXPECT_EQ(run("validate --input /nonexistent.yaml").code, 2);
    EXPECT_EQ(run("frobnicate").code, 2);
}

TEST(Cli, ClassifyExitCodes) {
    auto yes = run("classify --input " + seed("r1.yaml") + " --sigma id --tau id --format json");
    EXPECT_EQ(yes.code, 0) << yes.out;
    auto j = nlohmann::json::parse(yes.out);
    EXPECT_EQ(j["verdict"], "Conjugate");
    EXPECT_TRUE(j["certificate"].contains("Xi"));
    auto no = run("classify --input " + seed("r1.yaml"));
    EXPECT_EQ(no.code, 3) << no.out;
    EXPECT_NE(no.out.find("NotConjugate"), std::string::npos);
    EXPECT_EQ(run("classify --input " + seed("r1.yaml") + " --sigma \"(1 3)\"").code, 2);
}

TEST(Cli, Appbr) {
    auto r = run("appbr 6 3");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("NotCongruent"), std::string::npos) << r.out;
    EXPECT_NE(r.out.find("NotConjugate"), std::string::npos) << r.out;
    EXPECT_EQ(run("appbr 4 2").code, 2);
}

TEST(Cli, ConnTowerArtifacts) {
    fs::path out = scratch() / "conn";
    auto r = run("tower --input " + seed("conn.yaml") + " --depth 5 --out \"" + out.string() + "\"");
    EXPECT_EQ(r.code, 0) << r.out;
    for (int n = 1; n <= 5; ++n) EXPECT_TRUE(fs::exists(out / ("level" + std::to_string(n) + ".dot"))) << n;
    std::string txt = slurp(out / "tower.txt");
    EXPECT_NE(txt.find("pi0=1"), std::string::npos) << txt;
    EXPECT_EQ(txt.find("pi0=2"), std::string::npos) << txt;
}

TEST(Cli, PathTowerWitnesses) {
    fs::path out = scratch() / "nop";
    auto r = run("tower --input " + seed("nop.yaml") + " --depth 3 --k33 --lifts 20 --out \"" + out.string() + "\"");
    EXPECT_EQ(r.code, 0) << r.out;
    ASSERT_TRUE(fs::exists(out / "k33_level1.json"));
    auto j = nlohmann::json::parse(slurp(out / "k33_level1.json"));
    EXPECT_FALSE(j.empty());
}

TEST(Cli, GraveTowerEnds) {
    auto r = run("tower --input " + seed("spl.yaml") + " --depth 6 --ends");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("Cantor-branching"), std::string::npos) << r.out;
    EXPECT_EQ(r.out.find("not Cantor-branching"), std::string::npos) << r.out;
    EXPECT_EQ(run("tower --input " + seed("nop.yaml") + " --depth 2 --ends").code, 2);
}

TEST(Cli, Compare) {
    auto r = run("compare --input " + seed("sccb.yaml") + " --sccb 1,0,0 --against 2,0,0 --depth 3");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("Distinguished"), std::string::npos) << r.out;
}

TEST(Cli, SpectrumExport) {
    auto r = run("spectrum export --input " + seed("r1.yaml") + " --sigma id --format dot");
    EXPECT_EQ(r.code, 0) << r.out;
    EXPECT_NE(r.out.find("digraph"), std::string::npos) << r.out;
}

TEST(Cli, OutputIsDeterministic) {
    fs::path a = scratch() / "det_a", b = scratch() / "det_b";
    for (auto& d : {a, b})
        ASSERT_EQ(run("tower --input " + seed("sccb.yaml") + " --depth 3 --invariants --out \"" + d.string() + "\"").code, 0);
    for (auto& e : fs::directory_iterator(a)) EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
}
