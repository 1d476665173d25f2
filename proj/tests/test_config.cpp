#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "scrap/config.hpp"
#include "scrap/runner.hpp"

using namespace scrap;

namespace {

ErrorKind kind_of(const std::string& text) {
    try {
        load_config_text(text);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::InvalidArgument;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("scrap_config_test_" + name);
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST(Config, EmptyDocumentGivesDefaults) {
    const RunConfig c = load_config_text("{}");
    EXPECT_EQ(c.protocol, "levels");
    EXPECT_EQ(c.bound_states.grid_points, 4096u);
    EXPECT_EQ(c.level_count, 4u);
    EXPECT_DOUBLE_EQ(c.circuit.junction_capacitance_pf, 1.2);
    EXPECT_DOUBLE_EQ(c.evolve.dt, 0.001);
    EXPECT_TRUE(c.thresholds.empty());
}

TEST(Config, QuantitiesConvertToCanonicalUnits) {
    EXPECT_DOUBLE_EQ(parse_quantity("2.5 ns", Dimension::Time, "t"), 2.5);
    EXPECT_DOUBLE_EQ(parse_quantity("1500 ps", Dimension::Time, "t"), 1.5);
    EXPECT_DOUBLE_EQ(parse_quantity("3 uA", Dimension::Current, "i"), 3000.0);
    EXPECT_DOUBLE_EQ(parse_quantity("1.2 pF", Dimension::Capacitance, "c"), 1.2);
    EXPECT_DOUBLE_EQ(parse_quantity("2 nA/ns", Dimension::SweepRate, "r"), 2.0);
    EXPECT_DOUBLE_EQ(parse_quantity(0.5, Dimension::Dimensionless, "x"), 0.5);
}

TEST(Config, UnknownUnitRejected) {
    EXPECT_EQ(kind_of(R"({"protocol":"inversion","schedule":{"start":"-10 fortnights"}})"), ErrorKind::UnknownUnit);
}

TEST(Config, WrongDimensionRejected) {
    EXPECT_EQ(kind_of(R"({"schedule":{"start":"-10 nA"}})"), ErrorKind::ValidationError);
    EXPECT_EQ(kind_of(R"({"schedule":{"start":-10}})"), ErrorKind::ValidationError);
}

TEST(Config, ZeroWidthPulseRejected) {
    EXPECT_EQ(kind_of(R"({"protocol":"inversion","schedule":{"preset":"custom",
        "pump":{"shape":"gaussian","amplitude":"3 nA","center":"0 ns","width":"0 ns"}}})"),
              ErrorKind::ValidationError);
}

TEST(Config, UnknownFieldRejected) {
    EXPECT_EQ(kind_of(R"({"protocl":"levels"})"), ErrorKind::ValidationError);
    EXPECT_EQ(kind_of(R"({"circuit":{"critical_curent":"3 uA"}})"), ErrorKind::ValidationError);
    EXPECT_EQ(kind_of(R"({"protocol":"teleport"})"), ErrorKind::ValidationError);
}

TEST(Config, SyntaxErrorCarriesPosition) {
    try {
        load_config_text("{\n  \"protocol\": \"levels\",\n  oops\n}");
        FAIL() << "expected ParseError";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParseError);
        EXPECT_EQ(e.line(), 3);
        EXPECT_GE(e.column(), 3);
    }
}

TEST(Config, RoundTripIsStable) {
    for (const auto& entry : std::filesystem::directory_iterator(SCRAP_CONFIG_DIR)) {
        SCOPED_TRACE(entry.path().string());
        const RunConfig a = load_config(entry.path().string());
        const Json first = dump_config(a);
        const RunConfig b = config_from_json(first);
        EXPECT_EQ(dump_config(b).dump(), first.dump());
        EXPECT_EQ(b.protocol, a.protocol);
        EXPECT_DOUBLE_EQ(b.evolve.dt, a.evolve.dt);
        EXPECT_EQ(b.thresholds.size(), a.thresholds.size());
    }
}

TEST(Config, WithParameterWritesNestedPath) {
    const Json doc = parse_config_text(R"({"schedule":{"preset":"inversion"}})");
    const Json out = with_parameter(doc, "schedule.pump_scale", 0.9);
    EXPECT_EQ(out["schedule"]["pump_scale"], 0.9);
    EXPECT_EQ(out["schedule"]["preset"], "inversion");
    const Json fresh = with_parameter(doc, "swap.sweep_rate", "4 nA/ns");
    EXPECT_EQ(fresh["swap"]["sweep_rate"], "4 nA/ns");
    EXPECT_FALSE(doc.contains("swap"));
}

TEST(Config, EmptySweepProducesEmptyTable) {
    const RunConfig c = load_config_text(
        R"({"protocol":"sweep","sweep":{"protocol":"inversion","parameter":"schedule.pump_scale","values":[]}})");
    const auto dir = scratch("empty");
    const RunReport r = run(c, dir.string());
    EXPECT_EQ(r.exit_code(), 0);
    ASSERT_TRUE(std::filesystem::exists(dir / "sweep.csv"));
    const std::string csv = read_file(dir / "sweep.csv");
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1);
}

TEST(Config, ThresholdFailureGivesExitOne) {
    const RunConfig c = load_config_text(R"({"thresholds":{"bound_states":{"min":40}}})");
    const RunReport r = run(c, scratch("thresh").string());
    EXPECT_EQ(r.exit_code(), 1);
}

TEST(Config, UnknownThresholdMetricIsConfigError) {
    const RunConfig c = load_config_text(R"({"thresholds":{"no_such_metric":{"min":1}}})");
    const RunReport r = run(c, scratch("metric").string());
    EXPECT_EQ(r.exit_code(), 2);
}

TEST(Config, IdenticalRunsGiveIdenticalBytes) {
    const RunConfig c = load_config_text(R"({"protocol":"inversion","calibrate":false,"numerics":{"record_every":20}})");
    const auto a = scratch("det_a"), b = scratch("det_b");
    run(c, a.string());
    run(c, b.string());
    for (const auto& f : {"inversion.csv", "report.json"}) {
        SCOPED_TRACE(f);
        ASSERT_TRUE(std::filesystem::exists(a / f));
        EXPECT_EQ(read_file(a / f), read_file(b / f));
    }
    const std::string csv = read_file(a / "inversion.csv");
    EXPECT_EQ(csv.find('\r'), std::string::npos);
}
