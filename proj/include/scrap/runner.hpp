#pragma once

// Executes a resolved RunConfig: runs the selected protocol, writes CSV
// tables, optional SVG plots, report.json and report.txt.

#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "scrap/circuit_model.hpp"
#include "scrap/config.hpp"
#include "scrap/dynamics.hpp"
#include "scrap/errors.hpp"
#include "scrap/plot.hpp"
#include "scrap/pulses.hpp"
#include "scrap/single_qubit.hpp"
#include "scrap/table.hpp"
#include "scrap/two_qubit.hpp"

namespace scrap {

using Metrics = std::vector<std::pair<std::string, double>>;

/// In-memory result of one protocol run, before anything touches the disk.
struct ProtocolOutput {
    Metrics metrics;
    std::vector<Table> tables;
    std::vector<PlotSpec> plots;
    std::vector<std::string> notes;

    double metric(const std::string& name) const {
        for (const auto& [k, v] : metrics)
            if (k == name) return v;
        throw Error(ErrorKind::InvalidArgument, "no metric named " + name);
    }
};

struct ThresholdCheck {
    std::string metric;
    double value = 0.0;
    std::optional<double> min;
    std::optional<double> max;
    bool passed = false;
};

struct RunReport {
    std::string protocol;
    Json resolved_config;
    Metrics metrics;
    std::vector<ThresholdCheck> checks;
    std::vector<std::string> files;
    std::vector<std::string> notes;
    std::optional<ErrorKind> error;
    std::string error_message;

    bool thresholds_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    /// 0 ok, 1 thresholds failed, 2 config error, 3 numerical failure.
    int exit_code() const {
        if (error) return is_config_error(*error) ? 2 : 3;
        return thresholds_passed() ? 0 : 1;
    }
};

namespace detail {

inline QubitModel3 qubit_model(const RunConfig& c) {
    return make_qubit_model(c.circuit, solve_bound_states(c.circuit, 3, c.bound_states));
}

inline PulseSchedule schedule_for(const RunConfig& c, const QubitModel3& m) {
    return resolve_schedule(c.schedule, resolve_carrier(c.schedule.carrier, m.omega10(), m.omega21()));
}

inline SingleQubitOptions single_options(const RunConfig& c) {
    SingleQubitOptions o;
    o.evolve = c.evolve;
    o.calibrate = c.calibrate;
    o.transfer_target = c.transfer_target;
    return o;
}

inline std::vector<PlotSpec> trajectory_plots(const std::string& table, const TrajectoryResult& r,
                                              const std::string& title) {
    PlotSpec pop{table + "_populations.svg", table, title + ": populations", "t_ns", {}, "t (ns)", "population"};
    PlotSpec eig{table + "_eigenvalues.svg", table, title + ": adiabatic energies", "t_ns", {}, "t (ns)",
                 "energy (rad/ns)"};
    for (std::size_t i = 0; i < r.labels.size(); ++i) {
        pop.y_columns.push_back("P_" + r.labels[i]);
        eig.y_columns.push_back("mu_" + std::to_string(i));
    }
    if (r.adiabatic_populations.empty()) return {pop};
    return {pop, eig};
}

inline ProtocolOutput run_levels(const RunConfig& c) {
    ProtocolOutput out;
    const auto levels = solve_bound_states(c.circuit, c.level_count, c.bound_states);
    out.metrics.push_back({"bound_states", static_cast<double>(count_bound_states(c.circuit, c.bound_states))});
    out.metrics.push_back({"omega10_ghz", levels.size() > 1 ? levels.transition_ghz(1, 0) : NAN});
    out.metrics.push_back({"omega21_ghz", levels.size() > 2 ? levels.transition_ghz(2, 1) : NAN});
    out.metrics.push_back({"plasma_frequency_ghz", units::rad_per_ns_to_ghz(plasma_frequency(c.circuit, levels.well.minimum))});
    const std::size_t n = std::min<std::size_t>(levels.size(), 3);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            out.metrics.push_back({"delta_" + std::to_string(i) + std::to_string(j), levels.dipole(i, j)});
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            out.metrics.push_back({"p_" + std::to_string(i) + std::to_string(j), levels.momentum(i, j)});

    Table lv{"levels", {"i", "j", "energy_i_ghz", "omega_ij_ghz", "delta_ij", "p_ij", "abs_p_ij"}, {}};
    for (std::size_t i = 0; i < levels.size(); ++i)
        for (std::size_t j = 0; j < levels.size(); ++j)
            lv.rows.push_back({double(i), double(j), units::rad_per_ns_to_ghz(levels.energies[i] - levels.well.minimum_energy),
                               levels.transition_ghz(i, j), levels.dipole(i, j), levels.momentum(i, j),
                               std::abs(levels.momentum(i, j))});
    out.tables.push_back(lv);

    Table pot{"potential", {"delta", "potential_ghz"}, {}};
    const auto& g = levels.grid;
    const std::size_t stride = std::max<std::size_t>(1, g.points / 512);
    for (std::size_t k = 0; k < g.points; k += stride) {
        pot.rows.push_back({g.at(k), units::rad_per_ns_to_ghz(potential_energy(c.circuit, g.at(k)) - levels.well.minimum_energy)});
    }
    out.tables.push_back(pot);
    out.plots.push_back({"potential.svg", "potential", "left well", "delta", {"potential_ghz"}, "phase (rad)", "U (GHz)"});
    return out;
}

inline ProtocolOutput run_pi_pulse(const RunConfig& c) {
    ProtocolOutput out;
    const double area = c.pi_pulse_area * c.schedule.pump_scale;
    const double simulated = simulate_resonant_pulse(area, c.pi_pulse_width, c.evolve);
    const double analytic = pi_pulse_analytic(area);
    out.metrics = {{"area", area}, {"excitation", simulated}, {"analytic", analytic}, {"error", std::abs(simulated - analytic)}};
    return out;
}

inline void add_adiabatic_metrics(ProtocolOutput& out, const QubitModel3& m, const PulseSchedule& s, const RunConfig& c) {
    try {
        const auto a = schedule_adiabaticity(m, s, 0.01, c.adiabatic_threshold);
        out.metrics.push_back({"max_margin", a.max_margin});
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateGap) throw;
        out.notes.push_back(e.what());
    }
}

inline ProtocolOutput run_inversion_protocol(const RunConfig& c) {
    ProtocolOutput out;
    const auto m = qubit_model(c);
    const auto s = schedule_for(c, m);
    const auto r = run_inversion(m, s, c.initial_state, single_options(c));
    out.metrics = {{"fidelity", r.fidelity},
                   {"leakage", r.leakage},
                   {"calibration_factor", r.calibration_factor},
                   {"final_p0", r.trajectory.final_population(0)},
                   {"final_p1", r.trajectory.final_population(1)},
                   {"final_p2", r.trajectory.final_population(2)},
                   {"duration_ns", s.duration()},
                   {"norm_drift", r.trajectory.max_norm_drift}};
    add_adiabatic_metrics(out, m, s, c);
    out.tables.push_back(thin(trajectory_table("inversion", r.trajectory), 4001));
    out.plots = trajectory_plots("inversion", r.trajectory, "inversion");
    return out;
}

inline ProtocolOutput run_hadamard_protocol(const RunConfig& c) {
    ProtocolOutput out;
    const auto m = qubit_model(c);
    const auto s = schedule_for(c, m);
    const auto o = single_options(c);
    const auto from1 = run_hadamard(m, s, 1, o);
    const auto from0 = run_hadamard(m, s, 0, o);
    const double diff = std::abs(wrap_phase(from1.relative_phase - from0.relative_phase));
    out.metrics = {{"fidelity", from1.fidelity},
                   {"fidelity_from_0", from0.fidelity},
                   {"relative_phase_from_1", from1.relative_phase},
                   {"relative_phase_from_0", from0.relative_phase},
                   {"phase_difference", diff},
                   {"phase_difference_error", std::abs(diff - units::pi)},
                   {"leakage", std::max(from1.leakage, from0.leakage)},
                   {"final_p0", from1.trajectory.final_population(0)},
                   {"final_p1", from1.trajectory.final_population(1)}};
    add_adiabatic_metrics(out, m, s, c);
    out.tables.push_back(thin(trajectory_table("hadamard", from1.trajectory), 4001));
    out.plots = trajectory_plots("hadamard", from1.trajectory, "superposition");
    return out;
}

inline ProtocolOutput run_phase_protocol(const RunConfig& c) {
    ProtocolOutput out;
    const auto m = qubit_model(c);
    const auto r = phase_gate(m, c.schedule.stark, c.schedule.start, c.schedule.end, c.evolve);
    out.metrics = {{"simulated_phase", r.simulated_phase},
                   {"expected_phase", wrap_phase(r.expected_phase)},
                   {"phase_error", std::abs(wrap_phase(r.simulated_phase - r.expected_phase))},
                   {"population_change", r.max_population_change}};
    out.tables.push_back(thin(trajectory_table("phase_gate", r.gate.trajectory), 4001));
    return out;
}

inline ProtocolOutput run_not_protocol(const RunConfig& c) {
    ProtocolOutput out;
    const auto m = qubit_model(c);
    const auto r = not_gate(m, schedule_for(c, m), single_options(c));
    out.metrics = {{"process_fidelity", r.process_fidelity},
                   {"fidelity_from_0", r.from_zero.fidelity},
                   {"correction_phase", r.correction_phase},
                   {"fixed_pi_process_fidelity", r.fixed_pi_process_fidelity},
                   {"calibration_factor", r.calibration_factor}};
    return out;
}

inline ProtocolOutput run_readout_protocol(const RunConfig& c) {
    ProtocolOutput out;
    const auto m = qubit_model(c);
    const auto r = readout_transfer(m, single_options(c), schedule_for(c, m));
    out.metrics = {{"transfer", r.transfer.fidelity},
                   {"selectivity", r.selectivity.fidelity},
                   {"calibration_factor", r.calibration_factor}};
    out.tables.push_back(thin(trajectory_table("readout", r.transfer.trajectory), 4001));
    out.plots = trajectory_plots("readout", r.transfer.trajectory, "readout transfer");
    return out;
}

inline ProtocolOutput run_iswap_protocol(const RunConfig& c) {
    ProtocolOutput out;
    const auto params = coupled_circuit_with_zeta(c.circuit, c.zeta);
    const auto levels = solve_bound_states(params.dressed_qubit(), 3, c.bound_states);
    const auto r = run_iswap_passage(params, levels, c.swap);
    const auto m = build_subspace_hamiltonians(params, levels, PulseShape::zero());
    out.metrics = {{"swap_fidelity", r.swap_fidelity},
                   {"reverse_swap_fidelity", r.reverse_swap_fidelity},
                   {"spectator_min", r.spectator_min},
                   {"leakage_max", r.leakage_max},
                   {"ground_population", r.ground_population},
                   {"window_ns", r.window},
                   {"boundary_ratio", r.boundary_detuning_ratio},
                   {"coupling_rad_per_ns", m.constants.swap},
                   {"resonant_swap_time_ns", resonant_swap_period(params, levels)},
                   {"iswap_raw_fidelity", r.iswap.raw_fidelity},
                   {"iswap_corrected_fidelity", r.iswap.corrected_fidelity},
                   {"z_correction_qubit1", wrap_phase(r.iswap.qubit1)},
                   {"z_correction_qubit2", wrap_phase(r.iswap.qubit2)},
                   {"residual_conditional_phase", r.iswap.residual},
                   {"norm_drift", std::max(r.swap.max_norm_drift, r.spectator.max_norm_drift)}};
    out.tables.push_back(thin(trajectory_table("swap", r.swap), 4001));
    out.tables.push_back(thin(trajectory_table("spectator", r.spectator), 4001));
    for (auto& p : trajectory_plots("swap", r.swap, "swap block")) out.plots.push_back(p);
    for (auto& p : trajectory_plots("spectator", r.spectator, "spectator block")) out.plots.push_back(p);
    return out;
}

inline ProtocolOutput run_adiabaticity_protocol(const RunConfig& c) {
    ProtocolOutput out;
    const auto m = qubit_model(c);
    const auto s = schedule_for(c, m);
    const auto a = schedule_adiabaticity(m, s, 0.01, c.adiabatic_threshold);
    const auto b = schedule_boundary_angles(m, s);
    out.metrics = {{"max_margin", a.max_margin},
                   {"max_margin_time_ns", a.max_margin_time},
                   {"min_gap", a.min_gap},
                   {"adiabatic", a.adiabatic ? 1.0 : 0.0},
                   {"theta_start", b.start.value_or(NAN)},
                   {"theta_end", b.end.value_or(NAN)}};
    Table t{"adiabaticity", {"t_ns", "theta", "margin", "rate_over_gap", "gap", "rabi", "detuning"}, {}};
    for (std::size_t k = 0; k < a.times.size(); ++k) {
        const auto d = two_level_drive(m, s, a.times[k]);
        t.rows.push_back({a.times[k], a.theta[k], a.margin[k], a.rate_over_gap[k], a.gap[k], d.rabi, d.detuning});
    }
    out.tables.push_back(t);
    out.plots.push_back({"adiabaticity.svg", "adiabaticity", "adiabaticity margin", "t_ns", {"margin"}, "t (ns)", "eta"});
    out.plots.push_back({"mixing_angle.svg", "adiabaticity", "mixing angle", "t_ns", {"theta"}, "t (ns)", "theta (rad)"});
    return out;
}

inline ProtocolOutput run_stark_protocol(const RunConfig& c) {
    ProtocolOutput out;
    Table t{"stark_shift", {"current_na", "shift_pct"}, {}};
    for (std::size_t i = 0; i < c.stark_currents.size(); ++i) {
        const double pct = 100.0 * stark_shift_ratio(c.circuit, c.stark_currents[i], c.bound_states);
        out.metrics.push_back({"shift_pct_" + std::to_string(i + 1), pct});
        t.rows.push_back({c.stark_currents[i], pct});
    }
    out.tables.push_back(t);
    return out;
}

}  // namespace detail

inline ProtocolOutput run_protocol(const RunConfig& c, const std::string& protocol);

/// One row per sweep value, in input order; up to `workers` runs in flight.
inline ProtocolOutput run_sweep(const RunConfig& c) {
    ProtocolOutput out;
    const auto& sw = c.sweep;
    const std::size_t n = sw.values.size();
    std::vector<std::optional<ProtocolOutput>> results(n);
    std::vector<double> baseline(n, NAN);
    std::vector<double> numeric(n, NAN);
    std::vector<RunConfig> configs;
    configs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Json doc = with_parameter(c.document, sw.parameter, sw.values[i]);
        doc["protocol"] = sw.protocol;
        doc.erase("sweep");
        configs.push_back(config_from_json(doc));
        const auto& v = sw.values[i];
        if (v.is_number()) numeric[i] = v.get<double>();
        else if (v.is_string()) {
            std::istringstream is(v.get<std::string>());
            is.imbue(std::locale::classic());
            is >> numeric[i];
        }
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = run_protocol(configs[i], sw.protocol);
                if (sw.baseline == "pi-pulse") {
                    baseline[i] = detail::run_pi_pulse(configs[i]).metric("excitation");
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const std::size_t workers = std::max<std::size_t>(1, std::min(c.workers, std::max<std::size_t>(n, 1)));
    std::vector<std::thread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    Table t{"sweep", {"index", "value"}, {}};
    if (n > 0) {
        for (const auto& [name, v] : results[0]->metrics) t.columns.push_back(name);
        if (sw.baseline == "pi-pulse") t.columns.push_back("pi_pulse_excitation");
    }
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> row{double(i), numeric[i]};
        for (const auto& [name, v] : results[0]->metrics) {
            double value = NAN;
            for (const auto& [k, x] : results[i]->metrics)
                if (k == name) value = x;
            row.push_back(value);
        }
        if (sw.baseline == "pi-pulse") row.push_back(baseline[i]);
        t.rows.push_back(std::move(row));
    }
    out.metrics.push_back({"rows", double(n)});
    for (std::size_t k = 2; k < t.columns.size(); ++k) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& r : t.rows) {
            lo = std::min(lo, r[k]);
            hi = std::max(hi, r[k]);
        }
        out.metrics.push_back({t.columns[k] + "_min", lo});
        out.metrics.push_back({t.columns[k] + "_max", hi});
    }
    if (n > 0 && t.columns.size() > 2) {
        PlotSpec p{"sweep.svg", "sweep", "sweep of " + sw.parameter, "value", {t.columns[2]}, sw.parameter, t.columns[2]};
        if (sw.baseline == "pi-pulse") p.y_columns.push_back("pi_pulse_excitation");
        out.plots.push_back(p);
    }
    out.tables.push_back(std::move(t));
    return out;
}

inline ProtocolOutput run_protocol(const RunConfig& c, const std::string& protocol) {
    if (protocol == "levels") return detail::run_levels(c);
    if (protocol == "pi-pulse") return detail::run_pi_pulse(c);
    if (protocol == "inversion") return detail::run_inversion_protocol(c);
    if (protocol == "hadamard") return detail::run_hadamard_protocol(c);
    if (protocol == "phase-gate") return detail::run_phase_protocol(c);
    if (protocol == "not-gate") return detail::run_not_protocol(c);
    if (protocol == "readout") return detail::run_readout_protocol(c);
    if (protocol == "iswap") return detail::run_iswap_protocol(c);
    if (protocol == "adiabaticity") return detail::run_adiabaticity_protocol(c);
    if (protocol == "stark-shift") return detail::run_stark_protocol(c);
    if (protocol == "sweep") return run_sweep(c);
    throw Error(ErrorKind::ValidationError, "protocol: unknown protocol \"" + protocol + "\"");
}

/// Thresholds naming an unknown metric are config errors unless `skipped`
/// collects them (a subcommand ran a different protocol than the config's).
inline std::vector<ThresholdCheck> check_thresholds(const RunConfig& c, const Metrics& metrics,
                                                    std::vector<std::string>* skipped = nullptr) {
    std::vector<ThresholdCheck> checks;
    for (const auto& [name, spec] : c.thresholds) {
        ThresholdCheck k{name, NAN, spec.min, spec.max, false};
        bool found = false;
        for (const auto& [m, v] : metrics)
            if (m == name) {
                k.value = v;
                found = true;
            }
        if (!found && skipped) {
            skipped->push_back(name);
            continue;
        }
        if (!found) throw Error(ErrorKind::ValidationError, "thresholds." + name + ": protocol reports no such metric");
        k.passed = std::isfinite(k.value) && (!spec.min || k.value >= *spec.min) && (!spec.max || k.value <= *spec.max);
        checks.push_back(k);
    }
    return checks;
}

inline Json report_json(const RunReport& r) {
    Json j;
    j["protocol"] = r.protocol;
    j["status"] = r.error ? "error" : (r.thresholds_passed() ? "pass" : "fail");
    j["exit_code"] = r.exit_code();
    if (r.error) j["error"] = {{"kind", std::string(to_string(*r.error))}, {"message", r.error_message}};
    Json m = Json::object();
    for (const auto& [k, v] : r.metrics) m[k] = std::isfinite(v) ? Json(v) : Json(nullptr);
    j["metrics"] = m;
    Json checks = Json::array();
    for (const auto& c : r.checks) {
        Json e{{"metric", c.metric}, {"value", std::isfinite(c.value) ? Json(c.value) : Json(nullptr)}, {"passed", c.passed}};
        if (c.min) e["min"] = *c.min;
        if (c.max) e["max"] = *c.max;
        checks.push_back(e);
    }
    j["thresholds"] = checks;
    j["notes"] = r.notes;
    j["files"] = r.files;
    j["config"] = r.resolved_config;
    return j;
}

inline std::string report_text(const RunReport& r) {
    std::ostringstream os;
    os << "protocol: " << r.protocol << "\n";
    if (r.error) os << "error: " << to_string(*r.error) << ": " << r.error_message << "\n";
    os << "metrics:\n";
    for (const auto& [k, v] : r.metrics) os << "  " << k << " = " << format_sig(v, 8) << "\n";
    if (!r.checks.empty()) {
        os << "thresholds:\n";
        for (const auto& c : r.checks) {
            os << "  " << (c.passed ? "PASS " : "FAIL ") << c.metric << " = " << format_sig(c.value, 8);
            if (c.min) os << "  min " << format_sig(*c.min, 8);
            if (c.max) os << "  max " << format_sig(*c.max, 8);
            os << "\n";
        }
    }
    for (const auto& n : r.notes) os << "note: " << n << "\n";
    if (!r.files.empty()) {
        os << "files:\n";
        for (const auto& f : r.files) os << "  " << f << "\n";
    }
    os << "status: " << (r.error ? "error" : (r.thresholds_passed() ? "pass" : "fail")) << "\n";
    return os.str();
}

/// Runs `protocol` (or the config's own) and writes every artifact into
/// `out_dir`. Module errors are captured in the report, not thrown.
inline RunReport run(const RunConfig& c, const std::string& out_dir, std::optional<std::string> protocol = std::nullopt,
                     bool plots = false) {
    namespace fs = std::filesystem;
    RunReport r;
    r.protocol = protocol.value_or(c.protocol);
    r.resolved_config = dump_config(c);
    r.resolved_config["protocol"] = r.protocol;
    fs::create_directories(out_dir);
    try {
        const auto out = run_protocol(c, r.protocol);
        r.metrics = out.metrics;
        r.notes = out.notes;
        std::vector<std::string> skipped;
        r.checks = check_thresholds(c, r.metrics, r.protocol == c.protocol ? nullptr : &skipped);
        for (const auto& name : skipped) r.notes.push_back("threshold " + name + " skipped: not reported by " + r.protocol);
        for (const auto& t : out.tables) {
            write_csv_file((fs::path(out_dir) / (t.name + ".csv")).string(), t);
            r.files.push_back(t.name + ".csv");
        }
        if (plots || c.plots) {
            for (const auto& p : out.plots) {
                for (const auto& t : out.tables) {
                    if (t.name != p.table) continue;
                    write_svg_file((fs::path(out_dir) / p.file).string(), t, p);
                    r.files.push_back(p.file);
                }
            }
        }
    } catch (const Error& e) {
        r.error = e.kind();
        r.error_message = e.what();
    }
    r.files.push_back("report.json");
    r.files.push_back("report.txt");
    {
        std::ofstream j(fs::path(out_dir) / "report.json", std::ios::binary);
        j << report_json(r).dump(2) << "\n";
    }
    {
        std::ofstream t(fs::path(out_dir) / "report.txt", std::ios::binary);
        t << report_text(r);
    }
    return r;
}

}  // namespace scrap
