#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include "json.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <map>

#ifndef SOLICLONE_CLI
#error "SOLICLONE_CLI must name the soliclone binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Run {
    int code = -1;
    std::string out;
    std::string err;
};

std::string quote(const std::string& s) { return "'" + s + "'"; }

Run run_cli(const std::string& args, const fs::path& work) {
    fs::create_directories(work);
    const auto out = work / "stdout.txt";
    const auto err = work / "stderr.txt";
    const std::string cmd = quote(SOLICLONE_CLI) + " " + args + " >" + quote(out.string()) + " 2>" + quote(err.string());
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = fixtures::read(out);
    r.err = fixtures::read(err);
    return r;
}

std::string corpus(const std::string& sub) { return "--corpus " + quote(fixtures::dir(sub).string()); }

json read_json(const fs::path& p) { return json::parse(fixtures::read(p)); }

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
        if (e.is_regular_file() && e.path().filename() != "timing.txt")
            files[fs::relative(e.path(), dir).string()] = fixtures::read(e.path());
    return files;
}

} // namespace

TEST(Cli, EmptyCorpusSucceedsWithZeroCounts) {
    const auto work = fixtures::scratch("cli_empty");
    fs::create_directories(work / "corpus");
    const auto r = run_cli("demographics --corpus " + quote((work / "corpus").string()) + " --out " +
                                 quote((work / "out").string()),
                             work);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto d = read_json(work / "out" / "demographics.json")["demographics"];
    for (const char* key : {"total_files", "contracts", "libraries", "interfaces", "events", "modifiers"})
        EXPECT_EQ(d[key].get<int>(), 0) << key;
}

TEST(Cli, MissingCorpusIsExitTwo) {
    const auto work = fixtures::scratch("cli_missing");
    const auto r = run_cli("detect --corpus " + quote((work / "nope").string()) + " --out " + quote((work / "out").string()),
                             work);
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("error:"), std::string::npos);
}

TEST(Cli, ThresholdOnExactModeIsExitThree) {
    const auto work = fixtures::scratch("cli_t1_threshold");
    const auto r = run_cli("detect " + corpus("seeded") + " --mode t1 --threshold 30 --out " + quote((work / "out").string()),
                             work);
    EXPECT_EQ(r.code, 3);
    EXPECT_FALSE(fs::exists(work / "out" / "pairs_t1.json"));
}

TEST(Cli, UnknownModeIsExitThree) {
    const auto work = fixtures::scratch("cli_mode");
    EXPECT_EQ(run_cli("detect " + corpus("seeded") + " --mode t4 --out " + quote((work / "out").string()), work).code, 3);
}

TEST(Cli, MissingRulesFileIsExitFour) {
    const auto work = fixtures::scratch("cli_rules");
    const auto r = run_cli("categorize " + corpus("families") + " --rules " + quote((work / "none.txt").string()) +
                                 " --out " + quote((work / "out").string()),
                             work);
    EXPECT_EQ(r.code, 4);
}

TEST(Cli, MalformedRulesFileIsExitFour) {
    const auto work = fixtures::scratch("cli_bad_rules");
    fixtures::write(work / "rules.txt", "NotACategory | order:1 | keywords: a\n");
    const auto r = run_cli("categorize " + corpus("families") + " --rules " + quote((work / "rules.txt").string()) +
                                 " --out " + quote((work / "out").string()),
                             work);
    EXPECT_EQ(r.code, 4);
}

TEST(Cli, UnknownModelTargetsAreExitFive) {
    const auto work = fixtures::scratch("cli_model_target");
    const std::string out = " --out " + quote((work / "out").string());
    EXPECT_EQ(run_cli("model " + corpus("families") + " --class 999" + out, work).code, 5);
    EXPECT_EQ(run_cli("model " + corpus("families") + " --root NoSuchContract" + out, work).code, 5);
}

TEST(Cli, SeededDetectFindsSixPairs) {
    const auto work = fixtures::scratch("cli_seeded");
    const auto r = run_cli("detect " + corpus("seeded") + " --mode t1 --out " + quote((work / "out").string()), work);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto pairs = read_json(work / "out" / "pairs_t1.json");
    EXPECT_EQ(pairs["pairs"].size(), 6u);
    const auto classes = read_json(work / "out" / "classes_t1.json")["classes"];
    ASSERT_EQ(classes.size(), 1u);
    EXPECT_EQ(classes[0]["size"].get<int>(), 4);
    EXPECT_EQ(classes[0]["representative"].get<std::string>(), "alpha.sol:9-19");
}

TEST(Cli, RootModelMatchesGolden) {
    const auto work = fixtures::scratch("cli_root_model");
    const auto r = run_cli("model " + corpus("models") + " --root Token --out " + quote((work / "out").string()), work);
    ASSERT_EQ(r.code, 0) << r.err;
    const auto m = read_json(work / "out" / "models" / "Token.json")["model"];
    auto golden = read_json(fixtures::dir("golden/erc20_safemath.json"));
    // category comes from the class the contract represents; compare structure only
    golden.erase("category");
    auto got = m;
    got.erase("category");
    EXPECT_EQ(got, golden);
}

TEST(Cli, OutputsAreByteIdenticalAcrossRuns) {
    const auto work = fixtures::scratch("cli_repeat");
    const std::string args = "full " + corpus("families") + " --out " + quote((work / "out").string());
    ASSERT_EQ(run_cli(args, work).code, 0);
    const auto first = snapshot(work / "out");
    fs::remove_all(work / "out");
    ASSERT_EQ(run_cli(args, work).code, 0);
    const auto second = snapshot(work / "out");
    ASSERT_FALSE(first.empty());
    EXPECT_EQ(first.size(), second.size());
    for (const auto& [name, text] : first) {
        ASSERT_TRUE(second.count(name)) << name;
        EXPECT_EQ(text, second.at(name)) << name;
    }
}

TEST(Cli, ReportsEmbedTheirConfiguration) {
    const auto work = fixtures::scratch("cli_config");
    const auto r = run_cli("full " + corpus("families") + " --threshold 20 --out " + quote((work / "out").string()), work);
    ASSERT_EQ(r.code, 0) << r.err;
    int checked = 0;
    for (const auto& e : fs::recursive_directory_iterator(work / "out")) {
        if (e.path().extension() != ".json" || e.path().filename() == "run_report.json") continue;
        const auto j = read_json(e.path());
        ASSERT_TRUE(j.contains("config")) << e.path();
        EXPECT_EQ(j["config"]["max_diff_threshold"].get<int>(), 20) << e.path();
        ++checked;
    }
    EXPECT_GE(checked, 12);
    const auto run = read_json(work / "out" / "run_report.json");
    EXPECT_TRUE(run.contains("config"));
    EXPECT_EQ(run["modes"].size(), 5u);
}

TEST(Cli, DiagnosticsGoToStderr) {
    const auto work = fixtures::scratch("cli_stderr");
    const auto r = run_cli("demographics " + corpus("corpus") + " --out " + quote((work / "out").string()), work);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.err.find("10_unbalanced.sol"), std::string::npos);
    EXPECT_EQ(r.out.find("skipped 10_unbalanced.sol"), std::string::npos);
}

TEST(Cli, ConfigFileIsHonouredAndFlagsOverride) {
    const auto work = fixtures::scratch("cli_config_file");
    fixtures::write(work / "run.cfg", "# comment\nmode = t1\ncorpus = " + fixtures::dir("seeded").string() + "\n");
    const auto r = run_cli("detect --config " + quote((work / "run.cfg").string()) + " --out " + quote((work / "out").string()),
                             work);
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_TRUE(fs::exists(work / "out" / "pairs_t1.json"));
    const auto bad = run_cli("detect --config " + quote((work / "missing.cfg").string()), work);
    EXPECT_EQ(bad.code, 3);
}
