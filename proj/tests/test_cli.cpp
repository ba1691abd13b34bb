#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include "capmeasure/cli.hpp"

using namespace capmeasure;

namespace {

struct Run {
    int status = -1;
    std::string output;
};

/// Runs the CLI with stderr merged into stdout.
Run run_cli(const std::string& args) {
    const std::string command = std::string("\"") + CAPMEASURE_CLI_PATH + "\" " + args + " 2>&1";
    Run r;
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
    const int raw = pclose(pipe);
    r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
    return r;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("capmeasure-cli-" + name);
    std::filesystem::remove_all(dir);
    return dir;
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST(Cli, EmptyTargetHasZeroCapacity) {
    const auto dir = scratch("empty");
    const auto r = run_cli("capacity --grid1d 9 --set none --out " + dir.string());
    EXPECT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("value=0 "), std::string::npos) << r.output;
    const auto doc = nlohmann::json::parse(read_file(dir / "capacity_s0.5_p2_q2_g0.5_e1_seed1.json"));
    EXPECT_EQ(doc["result"]["value"].get<double>(), 0.0);
}

TEST(Cli, VerifyCantorWritesThreeRowsAndVerdict) {
    const auto dir = scratch("verify");
    const auto r = run_cli("verify-thm1 --family cantor --levels 1..3 --s 0.5 --p 2 --q 2 --out " + dir.string());
    EXPECT_EQ(r.status, 0) << r.output;
    EXPECT_NE(r.output.find("verdict="), std::string::npos);
    const std::string csv = read_file(dir / "verify-thm1_s0.5_p2_q2_g0.5_e1_seed1.csv");
    EXPECT_EQ(count_lines(csv), 4u) << csv;
    EXPECT_EQ(csv.rfind("id,", 0), 0u);
}

TEST(Cli, BadParameterIsConfigError) {
    const auto r = run_cli("capacity --s 1.5 --out " + scratch("bad").string());
    EXPECT_EQ(r.status, 2);
    EXPECT_EQ(r.output, "config-error: s must lie in (0,1)\n");
}

TEST(Cli, UnknownConfigFieldIsNamed) {
    const auto dir = scratch("config");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"params": {"s": 0.5, "r": 1}})";
    const auto r = run_cli("capacity --config " + (dir / "c.json").string());
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.output.find("params.r"), std::string::npos) << r.output;
    EXPECT_EQ(count_lines(r.output), 1u);
}

TEST(Cli, InfeasibleCoverExitsThree) {
    const auto r = run_cli("content --grid1d 5 --set all --delta 0.2 --out " + scratch("infeasible").string());
    EXPECT_EQ(r.status, 3);
    EXPECT_EQ(r.output.rfind("infeasible: ", 0), 0u) << r.output;
}

TEST(Cli, FlagsOverrideConfig) {
    const auto dir = scratch("override");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "c.json") << R"({"command": "median", "space": {"grid1d": 5}, "field": [3, 1, 4, 1, 5], "params": {"gamma": 0.5}})";
    const auto r = run_cli("median --config " + (dir / "c.json").string() + " --gamma 0.25 --out " + dir.string());
    EXPECT_EQ(r.status, 0) << r.output;
    const auto doc = nlohmann::json::parse(read_file(dir / "median_s0.5_p2_q2_g0.25_e1_seed1.json"));
    // Values 1,1,3,4,5 with gamma 1/4: mass strictly below 3 is 2/5 > 1/4, so the median is 1.
    EXPECT_EQ(doc["median"].get<double>(), 1.0);
}

TEST(Cli, RepeatedRunsAreByteIdentical) {
    const auto a = scratch("det-a"), b = scratch("det-b");
    const std::string args = "capacity --grid1d 20 --set random:0.3 --strategy multistart --seed 5 --out ";
    ASSERT_EQ(run_cli(args + a.string()).status, 0);
    ASSERT_EQ(run_cli(args + b.string()).status, 0);
    const std::string name = "capacity_s0.5_p2_q2_g0.5_e1_seed5.json";
    EXPECT_EQ(read_file(a / name), read_file(b / name));
}

TEST(CliConfig, RejectsUnknownCommandAndSets) {
    cli::ScenarioConfig cfg;
    cfg.command = "nope";
    EXPECT_THROW(cli::run(cfg), Error);
    const cli::ResolvedSpace rs{grid1d(4), std::nullopt};
    EXPECT_THROW(cli::resolve_set("cantor", rs, 1), Error);
    EXPECT_THROW(cli::resolve_set(nlohmann::json::array({7}), rs, 1), Error);
    EXPECT_EQ(cli::resolve_set("1,3", rs, 1), (PointSet{1, 3}));
    EXPECT_EQ(cli::resolve_set("all", rs, 1).size(), 4u);
}

TEST(CliConfig, FileStemCarriesParameters) {
    cli::ScenarioConfig cfg;
    cfg.command = "capacity";
    cfg.params.q = kInfinity;
    cfg.seed = 42;
    EXPECT_EQ(cli::file_stem(cfg), "capacity_s0.5_p2_qinf_g0.5_e1_seed42");
}

TEST(CliConfig, CsvUsesTwelveDigits) {
    EXPECT_EQ(cli::csv_number(1.0 / 3.0), "0.333333333333");
    EXPECT_EQ(cli::csv_number(kInfinity), "inf");
}
