#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <set>

#include <json.hpp>

#include "advgeo/report.hpp"
#include "test_util.hpp"

using namespace advgeo;
namespace fs = std::filesystem;

namespace {

const std::string kDataset = std::string(ADVGEO_FIXTURES) + "/blobs.csv";
const std::string kLog = std::string(ADVGEO_FIXTURES) + "/blobs_log.csv";

RunConfig fixture_config(const std::string& out) {
    RunConfig c;
    c.dataset = kDataset;
    c.log = kLog;
    c.out = out;
    c.perplexity = 10;
    c.tsne_iters = 300;
    c.seed = 3;
    return c;
}

int run_cli(const std::string& args, const std::string& stderr_path) {
    const std::string cmd = std::string(ADVGEO_CLI) + " " + args + " > /dev/null 2> " + stderr_path;
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::set<std::string> listing(const fs::path& dir) {
    std::set<std::string> names;
    for (const auto& e : fs::directory_iterator(dir)) names.insert(e.path().filename().string());
    return names;
}

}  // namespace

TEST(Config, TextRoundTrip) {
    RunConfig c;
    c.dataset = "a.csv";
    c.measures = {Measure::euclidean, Measure::hopping};
    c.fd = 2.5;
    c.k_values = {1, 4};
    c.perplexity = 12.5;
    c.subsample = 40;
    c.seed = 18446744073709551615ull;
    c.restrict_to_map = true;
    c.distance_floor = 1e-9;
    c.epsilons = {0.1, 0.3};
    c.synth_spread = 1.0 / 3.0;
    c.simd = "scalar";
    EXPECT_EQ(parse_config_text(config_to_text(c)), c);
    EXPECT_EQ(parse_config_text(config_to_text(RunConfig{})), RunConfig{});
}

TEST(Config, FileSyntax) {
    const auto c = parse_config_text("# comment\n\nknn-k = 8\n measures = hopping , tsne\nfd=none\n");
    EXPECT_EQ(c.knn_k, 8u);
    EXPECT_EQ(c.measures, (std::vector<Measure>{Measure::tsne, Measure::hopping}));
    EXPECT_FALSE(c.fd.has_value());
    EXPECT_THROW(parse_config_text("bogus = 1\n"), Error);
    EXPECT_THROW(parse_config_text("knn_k = -3\n"), Error);
    EXPECT_THROW(parse_config_text("measures = manhattan\n"), Error);
    EXPECT_THROW(parse_config_text("no equals sign\n"), Error);
    EXPECT_THROW(parse_config_text("simd = neon9\n"), Error);
}

TEST(Config, Checks) {
    RunConfig c = fixture_config("unused");
    c.measures.clear();
    EXPECT_THROW(check_config(c, Command::distances), Error);
    c = fixture_config("unused");
    c.dataset = "/nonexistent.csv";
    EXPECT_THROW(check_config(c, Command::distances), Error);
    c = fixture_config("unused");
    c.log.clear();
    EXPECT_THROW(check_config(c, Command::entropy), Error);
    EXPECT_NO_THROW(check_config(c, Command::distances));
}

TEST(Config, EpsilonGridDefault) {
    const auto g = RunConfig{}.epsilon_grid();
    ASSERT_EQ(g.size(), 20u);
    EXPECT_DOUBLE_EQ(g.front(), 0.1);
    EXPECT_DOUBLE_EQ(g.back(), 2.0);
}

TEST(Commands, ValidateSummarizes) {
    RunConfig c = fixture_config("unused");
    const auto j = nlohmann::json::parse(run_command(Command::validate, c).summary_json);
    EXPECT_EQ(j["dataset"]["points"], 100);
    EXPECT_EQ(j["log"]["records"], 300);
}

TEST(Commands, DistancesSelection) {
    testutil::TempDir dir("cmd");
    RunConfig c = fixture_config(dir.file("out"));
    c.measures = {Measure::euclidean};
    run_command(Command::distances, c);
    const auto files = listing(dir.file("out"));
    EXPECT_EQ(files, (std::set<std::string>{"distance_euclidean.csv", "manifest.json"}));
}

TEST(Commands, EntropyRowCount) {
    testutil::TempDir dir("cmd");
    RunConfig c = fixture_config(dir.file("out"));
    c.measures = {Measure::euclidean, Measure::euclidean_cosine, Measure::hopping};
    run_command(Command::entropy, c);
    const auto body = testutil::read_text(dir.file("out/entropy_sweep.csv"));
    const auto lines = std::count(body.begin(), body.end(), '\n');
    EXPECT_EQ(lines - 1, (3 + 1) * 3);
}

TEST(Commands, ManifestConfigReparses) {
    testutil::TempDir dir("cmd");
    RunConfig c = fixture_config(dir.file("out"));
    c.measures = {Measure::hopping};
    run_command(Command::map, c);
    const auto m = nlohmann::json::parse(testutil::read_text(dir.file("out/manifest.json")));
    EXPECT_EQ(parse_config_text(m["config_text"].get<std::string>()), c);
    EXPECT_EQ(m["command"], "map");
    const auto map = nlohmann::json::parse(testutil::read_text(dir.file("out/map_hopping.json")));
    EXPECT_TRUE(map.contains("consistency"));
}

TEST(Commands, ReportIsDeterministic) {
    testutil::TempDir dir("cmd");
    run_command(Command::report, fixture_config(dir.file("a")));
    run_command(Command::report, fixture_config(dir.file("b")));
    const auto files = listing(dir.file("a"));
    EXPECT_EQ(files, listing(dir.file("b")));
    EXPECT_TRUE(files.count("displacement.csv"));
    EXPECT_TRUE(files.count("kl_trace.csv"));
    for (const auto& f : files) {
        if (f == "manifest.json") continue;
        EXPECT_EQ(testutil::read_text(dir.file("a/" + f)), testutil::read_text(dir.file("b/" + f))) << f;
    }
}

TEST(Cli, FlagsOverrideConfigFile) {
    testutil::TempDir dir("cli");
    testutil::write_text(dir.file("run.cfg"), "measures = hopping\nknn_k = 4\nout = " + dir.file("from_cfg") + "\n");
    const std::string args = "distances --config " + dir.file("run.cfg") + " --dataset " + kDataset +
                             " --measures euclidean --out " + dir.file("from_flag");
    ASSERT_EQ(run_cli(args, dir.file("err.txt")), 0) << testutil::read_text(dir.file("err.txt"));
    EXPECT_FALSE(fs::exists(dir.file("from_cfg")));
    EXPECT_TRUE(fs::exists(dir.file("from_flag/distance_euclidean.csv")));
    const auto m = nlohmann::json::parse(testutil::read_text(dir.file("from_flag/manifest.json")));
    EXPECT_EQ(parse_config_text(m["config_text"].get<std::string>()).knn_k, 4u);
}

TEST(Cli, ErrorsAreJson) {
    testutil::TempDir dir("cli");
    EXPECT_NE(run_cli("distances --dataset /nonexistent.csv --out " + dir.file("o"), dir.file("err.txt")), 0);
    auto err = nlohmann::json::parse(testutil::read_text(dir.file("err.txt")));
    EXPECT_EQ(err["error"]["kind"], "invalid_argument");

    testutil::write_text(dir.file("bad.csv"), "id,label,f0\n0,0,1\n1,x,2\n");
    EXPECT_NE(run_cli("validate --dataset " + dir.file("bad.csv"), dir.file("err2.txt")), 0);
    err = nlohmann::json::parse(testutil::read_text(dir.file("err2.txt")));
    EXPECT_EQ(err["error"]["kind"], "parse");
    EXPECT_NE(err["error"]["message"].get<std::string>().find("row 3"), std::string::npos);

    EXPECT_NE(run_cli("frobnicate", dir.file("err3.txt")), 0);
}

TEST(Cli, SynthThenValidate) {
    testutil::TempDir dir("cli");
    const std::string out = dir.file("s");
    ASSERT_EQ(run_cli("synth --synth-classes 3 --synth-per-class 10 --epsilons 0.5,1 --out " + out,
                      dir.file("err.txt")), 0);
    ASSERT_EQ(run_cli("validate --dataset " + out + "/dataset.bin --log " + out + "/attack_log.csv",
                      dir.file("err.txt")), 0) << testutil::read_text(dir.file("err.txt"));
}
