#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + "\"" SCRAP_CLI_PATH "\" " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string config(const std::string& name) { return std::string("\"") + SCRAP_CONFIG_DIR + "/" + name + "\""; }

fs::path scratch(const std::string& name) {
    auto p = fs::temp_directory_path() / ("scrap_cli_test_" + name);
    fs::remove_all(p);
    return p;
}

nlohmann::json read_report(const fs::path& dir) {
    std::ifstream in(dir / "report.json");
    return nlohmann::json::parse(in);
}

}  // namespace

TEST(Cli, LevelsSubcommandWritesReport) {
    const auto out = scratch("levels");
    EXPECT_EQ(run_cli("levels --config " + config("levels.json") + " --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "levels.csv"));
    EXPECT_TRUE(fs::exists(out / "report.txt"));
    const auto r = read_report(out);
    EXPECT_EQ(r["protocol"], "levels");
    EXPECT_EQ(r["exit_code"], 0);
}

TEST(Cli, LevelsWithoutConfigUsesDefaults) {
    const auto out = scratch("levels_default");
    EXPECT_EQ(run_cli("levels --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "report.json"));
}

TEST(Cli, EnvironmentSetsDefaultOutput) {
    const auto out = scratch("env");
    EXPECT_EQ(run_cli("levels", "SCRAP_OUT_DIR=\"" + out.string() + "\""), 0);
    EXPECT_TRUE(fs::exists(out / "report.json"));
    // An explicit --out wins over the environment.
    const auto explicit_out = scratch("env_explicit");
    EXPECT_EQ(run_cli("levels --out " + explicit_out.string(), "SCRAP_OUT_DIR=\"" + out.string() + "\""), 0);
    EXPECT_TRUE(fs::exists(explicit_out / "report.json"));
}

TEST(Cli, SimulateWithPlots) {
    const auto out = scratch("simulate");
    EXPECT_EQ(run_cli("simulate --config " + config("inversion.json") + " --plots --dt 0.002 --out " + out.string()), 0);
    bool svg = false;
    for (const auto& e : fs::directory_iterator(out)) svg = svg || e.path().extension() == ".svg";
    EXPECT_TRUE(svg);
}

TEST(Cli, FailedThresholdExitsOne) {
    const auto out = scratch("diabatic_fail");
    const auto cfg = out.string() + ".json";
    std::ofstream(cfg) << R"({"thresholds":{"bound_states":{"min":40}}})";
    EXPECT_EQ(run_cli("levels --config \"" + cfg + "\" --out " + out.string()), 1);
    EXPECT_EQ(read_report(out)["exit_code"], 1);
}

TEST(Cli, BadConfigExitsTwo) {
    const auto out = scratch("bad");
    const auto cfg = out.string() + ".json";
    std::ofstream(cfg) << "{\"protocol\": \"inversion\", \"schedule\": {\"start\": \"-10 parsecs\"}}";
    EXPECT_EQ(run_cli("simulate --config \"" + cfg + "\" --out " + out.string()), 2);
    const auto r = read_report(out);
    EXPECT_EQ(r["error"]["kind"], "UnknownUnit");
}

TEST(Cli, MissingConfigFileExitsTwo) {
    EXPECT_EQ(run_cli("simulate --config /nonexistent/x.json --out " + scratch("missing").string()), 2);
}

TEST(Cli, BadNumericFlagExitsTwo) {
    EXPECT_EQ(run_cli("simulate --config " + config("inversion.json") + " --dt -1 --out " + scratch("dt").string()), 2);
}

TEST(Cli, SweepSubcommand) {
    const auto out = scratch("sweep");
    EXPECT_EQ(run_cli("sweep --config " + config("dt_sweep.json") + " --workers 2 --out " + out.string()), 0);
    EXPECT_TRUE(fs::exists(out / "sweep.csv"));
}

TEST(Cli, AdiabaticitySubcommand) {
    const auto out = scratch("adiabatic");
    EXPECT_EQ(run_cli("adiabaticity --config " + config("inversion.json") + " --out " + out.string()), 0);
    EXPECT_EQ(read_report(out)["protocol"], "adiabaticity");
}

TEST(Cli, ReportReprintsExitCode) {
    const auto out = scratch("report");
    ASSERT_EQ(run_cli("levels --out " + out.string()), 0);
    EXPECT_EQ(run_cli("report --out " + out.string()), 0);
    EXPECT_EQ(run_cli("report --out " + scratch("report_empty").string()), 2);
}
