// Command-line front end: scrap <levels|simulate|sweep|adiabaticity|report> [options]

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "scrap/config.hpp"
#include "scrap/errors.hpp"
#include "scrap/runner.hpp"

namespace {

struct Options {
    std::string config;
    std::string out;
    bool plots = false;
    std::optional<std::size_t> workers;
    std::optional<double> dt;
};

std::string output_directory(const Options& o, const scrap::RunConfig* c) {
    if (!o.out.empty()) return o.out;
    if (c && !c->output_directory.empty()) return c->output_directory;
    if (const char* env = std::getenv("SCRAP_OUT_DIR"); env && *env) return env;
    return "scrap-out";
}

scrap::RunConfig load(const Options& o) {
    scrap::RunConfig c = o.config.empty() ? scrap::load_config_text("{}") : scrap::load_config(o.config);
    if (o.dt) {
        if (!(*o.dt > 0.0)) throw scrap::Error(scrap::ErrorKind::ValidationError, "--dt must be positive");
        c.evolve.dt = *o.dt;
        c.swap.evolve.dt = *o.dt;
    }
    if (o.workers) c.workers = *o.workers;
    return c;
}

void write_error_record(const std::string& dir, const scrap::Error& e) {
    scrap::Json j{{"status", "error"},
                  {"exit_code", scrap::is_config_error(e.kind()) ? 2 : 3},
                  {"error", {{"kind", std::string(scrap::to_string(e.kind()))}, {"message", e.what()}}}};
    if (e.line() > 0) {
        j["error"]["line"] = e.line();
        j["error"]["column"] = e.column();
    }
    std::cerr << j.dump() << "\n";
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (!ec) {
        std::ofstream out(std::filesystem::path(dir) / "report.json", std::ios::binary);
        out << j.dump(2) << "\n";
    }
}

int execute(const Options& o, std::optional<std::string> protocol, bool print = true) {
    scrap::RunConfig c;
    try {
        c = load(o);
    } catch (const scrap::Error& e) {
        write_error_record(output_directory(o, nullptr), e);
        return scrap::is_config_error(e.kind()) ? 2 : 3;
    }
    const std::string dir = output_directory(o, &c);
    const auto report = scrap::run(c, dir, protocol, o.plots);
    if (print) {
        std::cout << scrap::report_text(report);
        std::cout << "output: " << dir << "\n";
    }
    if (report.error) std::cerr << scrap::report_json(report)["error"].dump() << "\n";
    return report.exit_code();
}

int show_report(const Options& o) {
    const std::string dir = output_directory(o, nullptr);
    std::ifstream in(std::filesystem::path(dir) / "report.txt", std::ios::binary);
    if (!in) {
        std::cerr << "no report in " << dir << "\n";
        return 2;
    }
    std::cout << in.rdbuf();
    std::ifstream js(std::filesystem::path(dir) / "report.json", std::ios::binary);
    std::stringstream ss;
    ss << js.rdbuf();
    try {
        return scrap::Json::parse(ss.str()).at("exit_code").get<int>();
    } catch (const std::exception&) {
        return 2;
    }
}

void add_common(CLI::App* cmd, Options& o, bool config_required) {
    auto* opt = cmd->add_option("--config", o.config, "run configuration (JSON)");
    if (config_required) opt->required();
    cmd->add_option("--out", o.out, "output directory (default: $SCRAP_OUT_DIR or ./scrap-out)");
    cmd->add_flag("--plots", o.plots, "also write SVG plots");
    cmd->add_option("--workers", o.workers, "concurrent sweep workers")->check(CLI::PositiveNumber);
    cmd->add_option("--dt", o.dt, "time step in ns");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stark-chirped adiabatic passage simulator for flux-biased phase qubits"};
    app.require_subcommand(1);
    Options o;

    auto* levels = app.add_subcommand("levels", "solve the bound states of the left well");
    add_common(levels, o, false);
    auto* simulate = app.add_subcommand("simulate", "run the protocol named in the config");
    add_common(simulate, o, true);
    auto* sweep = app.add_subcommand("sweep", "run the sweep section of the config");
    add_common(sweep, o, true);
    auto* adiabatic = app.add_subcommand("adiabaticity", "adiabaticity margin of the configured schedule");
    add_common(adiabatic, o, false);
    auto* report = app.add_subcommand("report", "print the report in the output directory (runs --config first if given)");
    add_common(report, o, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    if (levels->parsed()) return execute(o, "levels");
    if (simulate->parsed()) return execute(o, std::nullopt);
    if (sweep->parsed()) return execute(o, "sweep");
    if (adiabatic->parsed()) return execute(o, "adiabaticity");
    if (report->parsed()) {
        if (!o.config.empty()) {
            const int code = execute(o, std::nullopt, false);
            if (code == 2 || code == 3) return code;
        }
        return show_report(o);
    }
    return 2;
}
