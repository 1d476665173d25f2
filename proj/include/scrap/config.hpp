#pragma once

// Run configuration: JSON text with explicit units on every physical quantity.
// Quantities are strings such as "8.351 uA", "2.5 ns", "2 nA/ns", "10.981 GHz".

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scrap/circuit_model.hpp"
#include "scrap/dynamics.hpp"
#include "scrap/errors.hpp"
#include "scrap/pulses.hpp"
#include "scrap/two_qubit.hpp"
#include "scrap/units.hpp"

namespace scrap {

using Json = nlohmann::ordered_json;

enum class Dimension { Current, Capacitance, Inductance, Time, Frequency, SweepRate, Dimensionless };

inline std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::Current: return "current";
        case Dimension::Capacitance: return "capacitance";
        case Dimension::Inductance: return "inductance";
        case Dimension::Time: return "time";
        case Dimension::Frequency: return "frequency";
        case Dimension::SweepRate: return "sweep rate";
        case Dimension::Dimensionless: return "dimensionless";
    }
    return "dimensionless";
}

/// Canonical unit of each dimension as used inside the library.
inline std::string_view canonical_unit(Dimension d) {
    switch (d) {
        case Dimension::Current: return "nA";
        case Dimension::Capacitance: return "pF";
        case Dimension::Inductance: return "pH";
        case Dimension::Time: return "ns";
        case Dimension::Frequency: return "GHz";
        case Dimension::SweepRate: return "nA/ns";
        case Dimension::Dimensionless: return "";
    }
    return "";
}

namespace detail {

struct UnitEntry {
    Dimension dimension;
    double scale;  // multiply to reach the canonical unit
};

inline const std::map<std::string, UnitEntry, std::less<>>& unit_table() {
    static const std::map<std::string, UnitEntry, std::less<>> table{
        {"A", {Dimension::Current, 1e9}},        {"mA", {Dimension::Current, 1e6}},
        {"uA", {Dimension::Current, 1e3}},       {"\xC2\xB5" "A", {Dimension::Current, 1e3}},
        {"nA", {Dimension::Current, 1.0}},       {"pA", {Dimension::Current, 1e-3}},
        {"F", {Dimension::Capacitance, 1e12}},   {"nF", {Dimension::Capacitance, 1e3}},
        {"pF", {Dimension::Capacitance, 1.0}},   {"fF", {Dimension::Capacitance, 1e-3}},
        {"H", {Dimension::Inductance, 1e12}},    {"nH", {Dimension::Inductance, 1e3}},
        {"pH", {Dimension::Inductance, 1.0}},    {"s", {Dimension::Time, 1e9}},
        {"ms", {Dimension::Time, 1e6}},          {"us", {Dimension::Time, 1e3}},
        {"\xC2\xB5" "s", {Dimension::Time, 1e3}}, {"ns", {Dimension::Time, 1.0}},
        {"ps", {Dimension::Time, 1e-3}},         {"Hz", {Dimension::Frequency, 1e-9}},
        {"kHz", {Dimension::Frequency, 1e-6}},   {"MHz", {Dimension::Frequency, 1e-3}},
        {"GHz", {Dimension::Frequency, 1.0}},    {"rad/ns", {Dimension::Frequency, 1.0 / units::two_pi}},
    };
    return table;
}

inline std::optional<UnitEntry> lookup_unit(std::string_view unit) {
    const auto& table = unit_table();
    if (auto it = table.find(unit); it != table.end()) return it->second;
    // Ratios such as nA/ns or uA/us.
    if (const auto slash = unit.find('/'); slash != std::string_view::npos) {
        const auto num = table.find(unit.substr(0, slash));
        const auto den = table.find(unit.substr(slash + 1));
        if (num != table.end() && den != table.end() && num->second.dimension == Dimension::Current &&
            den->second.dimension == Dimension::Time) {
            return UnitEntry{Dimension::SweepRate, num->second.scale / den->second.scale};
        }
    }
    return std::nullopt;
}

}  // namespace detail

/// Parses "<number> <unit>" into the canonical unit of `expected`.
/// Dimensionless fields accept bare JSON numbers.
inline double parse_quantity(const Json& value, Dimension expected, const std::string& field) {
    if (value.is_number()) {
        if (expected == Dimension::Dimensionless) return value.get<double>();
        throw Error(ErrorKind::ValidationError,
                    field + ": expected a " + std::string(to_string(expected)) + " with a unit, e.g. \"1 " +
                        std::string(canonical_unit(expected)) + "\"");
    }
    if (!value.is_string()) throw Error(ErrorKind::ValidationError, field + ": expected a quantity string");
    const std::string text = value.get<std::string>();
    std::istringstream is(text);
    is.imbue(std::locale::classic());
    double number = 0.0;
    if (!(is >> number)) throw Error(ErrorKind::ValidationError, field + ": cannot read a number from \"" + text + "\"");
    std::string unit;
    is >> unit;
    std::string rest;
    if (is >> rest) throw Error(ErrorKind::ValidationError, field + ": trailing text in \"" + text + "\"");
    if (unit.empty()) {
        if (expected == Dimension::Dimensionless) return number;
        throw Error(ErrorKind::ValidationError, field + ": missing unit in \"" + text + "\"");
    }
    const auto entry = detail::lookup_unit(unit);
    if (!entry) throw Error(ErrorKind::UnknownUnit, field + ": unknown unit \"" + unit + "\"");
    if (entry->dimension != expected) {
        throw Error(ErrorKind::ValidationError, field + ": unit \"" + unit + "\" is a " +
                                                    std::string(to_string(entry->dimension)) + ", expected a " +
                                                    std::string(to_string(expected)));
    }
    return number * entry->scale;
}

inline std::string format_quantity(double value, Dimension d) {
    std::string s = format_sig(value, 12);
    if (d != Dimension::Dimensionless) s += " " + std::string(canonical_unit(d));
    return s;
}

enum class CarrierReference { Omega10, Omega21, Explicit };

struct CarrierSpec {
    CarrierReference reference = CarrierReference::Omega10;
    double frequency_ghz = 0.0;  // used when explicit
};

struct ScheduleConfig {
    std::string preset = "inversion";  // inversion, hadamard, readout or custom
    PulseShape pump;
    PulseShape stark;
    double start = -10.0;
    double end = 10.0;
    CarrierSpec carrier{};
    double pump_scale = 1.0;
    double time_scale = 1.0;
};

struct ThresholdSpec {
    std::optional<double> min;
    std::optional<double> max;
};

struct SweepConfig {
    std::string protocol = "inversion";
    std::string parameter;      // dotted path into the config document
    std::vector<Json> values;   // raw values written at that path
    std::string baseline;       // "" or "pi-pulse": adds a pi-pulse column for pump scales
};

struct RunConfig {
    std::string protocol = "levels";
    CircuitParams circuit{};
    double zeta = 0.0017;
    std::size_t level_count = 4;
    BoundStateOptions bound_states{};
    ScheduleConfig schedule{};
    std::size_t initial_state = 1;
    bool calibrate = true;
    double transfer_target = 0.99;
    double pi_pulse_area = units::pi;  // rad
    double pi_pulse_width = 2.5;       // ns
    SwapOptions swap{};
    std::vector<double> stark_currents{400.0, -400.0};  // nA
    double adiabatic_threshold = 0.1;
    EvolveOptions evolve{};
    SweepConfig sweep{};
    std::size_t workers = 1;
    std::map<std::string, ThresholdSpec> thresholds;
    std::string output_directory;
    bool plots = false;
    Json document;  // raw input, used by sweeps
};

inline const std::set<std::string>& known_protocols() {
    static const std::set<std::string> p{"levels",   "pi-pulse", "inversion", "hadamard",    "phase-gate", "not-gate",
                                         "readout",  "iswap",    "adiabaticity", "stark-shift", "sweep"};
    return p;
}

namespace detail {

inline void check_keys(const Json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw Error(ErrorKind::ValidationError, where + ": expected an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (auto a : allowed) ok = ok || key == a;
        if (!ok) throw Error(ErrorKind::ValidationError, where + "." + key + ": unknown field");
    }
}

inline std::string join(const std::string& where, std::string_view key) {
    return where.empty() ? std::string(key) : where + "." + std::string(key);
}

template <typename T>
T get_as(const Json& obj, std::string_view key, const std::string& where, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(std::string(key)).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorKind::ValidationError, join(where, key) + ": wrong type");
    }
}

inline double get_quantity(const Json& obj, std::string_view key, const std::string& where, Dimension d,
                           double fallback) {
    if (!obj.contains(key)) return fallback;
    return parse_quantity(obj.at(std::string(key)), d, join(where, key));
}

inline PulseShape parse_pulse(const Json& j, const std::string& where) {
    if (j.is_null()) return PulseShape::zero();
    check_keys(j, where, {"shape", "amplitude", "center", "width", "slope", "start", "clip"});
    const std::string shape = get_as<std::string>(j, "shape", where, "zero");
    PulseShape p;
    if (shape == "zero") {
        p = PulseShape::zero();
    } else if (shape == "constant") {
        p = PulseShape::constant(get_quantity(j, "amplitude", where, Dimension::Current, 0.0));
    } else if (shape == "gaussian") {
        p = PulseShape::gaussian(get_quantity(j, "amplitude", where, Dimension::Current, 0.0),
                                 get_quantity(j, "center", where, Dimension::Time, 0.0),
                                 get_quantity(j, "width", where, Dimension::Time, 1.0));
    } else if (shape == "linear_ramp") {
        p = PulseShape::linear_ramp(get_quantity(j, "slope", where, Dimension::SweepRate, 0.0),
                                    get_quantity(j, "start", where, Dimension::Time, 0.0));
    } else {
        throw Error(ErrorKind::ValidationError, where + ".shape: unknown pulse shape \"" + shape + "\"");
    }
    if (j.contains("clip")) {
        const auto& c = j.at("clip");
        if (!c.is_array() || c.size() != 2) throw Error(ErrorKind::ValidationError, where + ".clip: expected [on, off]");
        p = p.clipped(parse_quantity(c[0], Dimension::Time, where + ".clip[0]"),
                      parse_quantity(c[1], Dimension::Time, where + ".clip[1]"));
    }
    try {
        p.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::ValidationError, where + ": " + e.what());
    }
    return p;
}

inline Json dump_pulse(const PulseShape& p) {
    Json j;
    j["shape"] = std::string(to_string(p.kind));
    switch (p.kind) {
        case PulseKind::Zero: break;
        case PulseKind::Constant: j["amplitude"] = format_quantity(p.amplitude, Dimension::Current); break;
        case PulseKind::Gaussian:
            j["amplitude"] = format_quantity(p.amplitude, Dimension::Current);
            j["center"] = format_quantity(p.center, Dimension::Time);
            j["width"] = format_quantity(p.width, Dimension::Time);
            break;
        case PulseKind::LinearRamp:
            j["slope"] = format_quantity(p.slope, Dimension::SweepRate);
            j["start"] = format_quantity(p.start, Dimension::Time);
            break;
    }
    if (p.clip) {
        j["clip"] = Json::array({format_quantity(p.clip->on, Dimension::Time), format_quantity(p.clip->off, Dimension::Time)});
    }
    return j;
}

inline ScheduleConfig preset_schedule(const std::string& name) {
    ScheduleConfig s;
    s.preset = name;
    PulseSchedule base;
    if (name == "inversion" || name == "readout") {
        base = make_inversion_schedule(0.0);
    } else if (name == "hadamard") {
        base = make_hadamard_schedule(0.0);
    } else if (name == "custom") {
        base.pump = PulseShape::zero();
        base.stark = PulseShape::zero();
    } else {
        throw Error(ErrorKind::ValidationError, "schedule.preset: unknown preset \"" + name + "\"");
    }
    s.pump = base.pump;
    s.stark = base.stark;
    s.start = base.start;
    s.end = base.end;
    s.carrier.reference = name == "readout" ? CarrierReference::Omega21 : CarrierReference::Omega10;
    return s;
}

/// Preset used when the schedule names none.
inline std::string default_preset(const std::string& protocol) {
    if (protocol == "hadamard" || protocol == "readout") return protocol;
    if (protocol == "phase-gate") return "custom";
    return "inversion";
}

inline ScheduleConfig parse_schedule(const Json& j, const std::string& protocol) {
    const std::string where = "schedule";
    check_keys(j, where, {"preset", "pump", "stark", "start", "end", "carrier", "pump_scale", "time_scale"});
    ScheduleConfig s = preset_schedule(get_as<std::string>(j, "preset", where, default_preset(protocol)));
    if (j.contains("pump")) s.pump = parse_pulse(j.at("pump"), where + ".pump");
    if (j.contains("stark")) s.stark = parse_pulse(j.at("stark"), where + ".stark");
    s.start = get_quantity(j, "start", where, Dimension::Time, s.start);
    s.end = get_quantity(j, "end", where, Dimension::Time, s.end);
    if (!(s.end > s.start)) throw Error(ErrorKind::ValidationError, "schedule.end: must exceed schedule.start");
    if (j.contains("carrier")) {
        const auto& c = j.at("carrier");
        if (c == "omega10") {
            s.carrier.reference = CarrierReference::Omega10;
        } else if (c == "omega21") {
            s.carrier.reference = CarrierReference::Omega21;
        } else {
            s.carrier.reference = CarrierReference::Explicit;
            s.carrier.frequency_ghz = parse_quantity(c, Dimension::Frequency, "schedule.carrier");
        }
    }
    s.pump_scale = get_quantity(j, "pump_scale", where, Dimension::Dimensionless, 1.0);
    s.time_scale = get_quantity(j, "time_scale", where, Dimension::Dimensionless, 1.0);
    if (!(s.time_scale > 0.0)) throw Error(ErrorKind::ValidationError, "schedule.time_scale: must be positive");
    return s;
}

inline Json dump_schedule(const ScheduleConfig& s) {
    Json j;
    j["preset"] = s.preset;
    j["pump"] = dump_pulse(s.pump);
    j["stark"] = dump_pulse(s.stark);
    j["start"] = format_quantity(s.start, Dimension::Time);
    j["end"] = format_quantity(s.end, Dimension::Time);
    switch (s.carrier.reference) {
        case CarrierReference::Omega10: j["carrier"] = "omega10"; break;
        case CarrierReference::Omega21: j["carrier"] = "omega21"; break;
        case CarrierReference::Explicit: j["carrier"] = format_quantity(s.carrier.frequency_ghz, Dimension::Frequency); break;
    }
    j["pump_scale"] = s.pump_scale;
    j["time_scale"] = s.time_scale;
    return j;
}

inline std::pair<int, int> line_column(const std::string& text, std::size_t byte) {
    int line = 1, column = 1;
    for (std::size_t i = 0; i < text.size() && i + 1 < byte; ++i) {
        if (text[i] == '\n') {
            ++line;
            column = 1;
        } else {
            ++column;
        }
    }
    return {line, column};
}

inline Stepper parse_stepper(const std::string& s) {
    if (s == "midpoint") return Stepper::Midpoint;
    if (s == "magnus4") return Stepper::Magnus4;
    throw Error(ErrorKind::ValidationError, "numerics.stepper: expected \"midpoint\" or \"magnus4\"");
}

}  // namespace detail

/// Builds a resolved config from a parsed JSON document.
inline RunConfig config_from_json(const Json& doc) {
    using detail::get_as;
    using detail::get_quantity;
    detail::check_keys(doc, "config",
                       {"protocol", "circuit", "coupling", "levels", "schedule", "initial_state", "calibrate",
                        "transfer_target", "pi_pulse", "swap", "stark_shift", "adiabaticity", "numerics", "sweep",
                        "thresholds", "output"});
    RunConfig c;
    c.document = doc;
    c.protocol = get_as<std::string>(doc, "protocol", "", "levels");
    if (!known_protocols().count(c.protocol)) {
        throw Error(ErrorKind::ValidationError, "protocol: unknown protocol \"" + c.protocol + "\"");
    }

    if (doc.contains("circuit")) {
        const auto& j = doc.at("circuit");
        const std::string w = "circuit";
        detail::check_keys(j, w, {"critical_current", "junction_capacitance", "loop_inductance", "inductance_ratio", "dc_bias"});
        auto& p = c.circuit;
        p.critical_current_ua = get_quantity(j, "critical_current", w, Dimension::Current, p.critical_current_ua * 1e3) * 1e-3;
        p.junction_capacitance_pf = get_quantity(j, "junction_capacitance", w, Dimension::Capacitance, p.junction_capacitance_pf);
        p.loop_inductance_ph = get_quantity(j, "loop_inductance", w, Dimension::Inductance, p.loop_inductance_ph);
        p.inductance_ratio = get_quantity(j, "inductance_ratio", w, Dimension::Dimensionless, p.inductance_ratio);
        p.dc_bias_ua = get_quantity(j, "dc_bias", w, Dimension::Current, p.dc_bias_ua * 1e3) * 1e-3;
    }
    try {
        c.circuit.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::ValidationError, std::string("circuit: ") + e.what());
    }

    if (doc.contains("coupling")) {
        const auto& j = doc.at("coupling");
        detail::check_keys(j, "coupling", {"zeta", "capacitance"});
        if (j.contains("zeta") && j.contains("capacitance")) {
            throw Error(ErrorKind::ValidationError, "coupling: give either zeta or capacitance, not both");
        }
        if (j.contains("capacitance")) {
            const double cm = get_quantity(j, "capacitance", "coupling", Dimension::Capacitance, 0.0);
            c.zeta = cm / (c.circuit.junction_capacitance_pf + cm);
        } else {
            c.zeta = get_quantity(j, "zeta", "coupling", Dimension::Dimensionless, c.zeta);
        }
        if (!(c.zeta > 0.0 && c.zeta < 1.0)) throw Error(ErrorKind::ValidationError, "coupling.zeta: must lie in (0, 1)");
    }

    if (doc.contains("levels")) {
        const auto& j = doc.at("levels");
        detail::check_keys(j, "levels", {"count", "grid_points", "left_margin", "right_margin", "convergence_tolerance"});
        c.level_count = get_as<std::size_t>(j, "count", "levels", c.level_count);
        c.bound_states.grid_points = get_as<std::size_t>(j, "grid_points", "levels", c.bound_states.grid_points);
        c.bound_states.left_margin_lengths = get_quantity(j, "left_margin", "levels", Dimension::Dimensionless, c.bound_states.left_margin_lengths);
        c.bound_states.right_margin_lengths = get_quantity(j, "right_margin", "levels", Dimension::Dimensionless, c.bound_states.right_margin_lengths);
        c.bound_states.convergence_tolerance = get_quantity(j, "convergence_tolerance", "levels", Dimension::Dimensionless, c.bound_states.convergence_tolerance);
        if (c.level_count < 1) throw Error(ErrorKind::ValidationError, "levels.count: must be at least 1");
        if (c.bound_states.grid_points < 16) throw Error(ErrorKind::ValidationError, "levels.grid_points: must be at least 16");
    }

    const std::string base_protocol =
        c.protocol == "sweep" && doc.contains("sweep") ? get_as<std::string>(doc.at("sweep"), "protocol", "sweep", "inversion")
                                                       : c.protocol;
    c.schedule = doc.contains("schedule") ? detail::parse_schedule(doc.at("schedule"), base_protocol)
                                          : detail::preset_schedule(detail::default_preset(base_protocol));
    c.initial_state = get_as<std::size_t>(doc, "initial_state", "", c.initial_state);
    if (c.initial_state > 2) throw Error(ErrorKind::ValidationError, "initial_state: must be 0, 1 or 2");
    c.calibrate = get_as<bool>(doc, "calibrate", "", c.calibrate);
    c.transfer_target = get_quantity(doc, "transfer_target", "", Dimension::Dimensionless, c.transfer_target);

    if (doc.contains("pi_pulse")) {
        const auto& j = doc.at("pi_pulse");
        detail::check_keys(j, "pi_pulse", {"area", "width"});
        c.pi_pulse_area = get_quantity(j, "area", "pi_pulse", Dimension::Dimensionless, c.pi_pulse_area);
        c.pi_pulse_width = get_quantity(j, "width", "pi_pulse", Dimension::Time, c.pi_pulse_width);
        if (!(c.pi_pulse_width > 0.0)) throw Error(ErrorKind::ValidationError, "pi_pulse.width: must be positive");
    }

    if (doc.contains("swap")) {
        const auto& j = doc.at("swap");
        const std::string w = "swap";
        detail::check_keys(j, w, {"sweep_rate", "start", "end", "min_detuning_ratio"});
        c.swap.sweep_rate = get_quantity(j, "sweep_rate", w, Dimension::SweepRate, c.swap.sweep_rate);
        c.swap.start = get_quantity(j, "start", w, Dimension::Time, c.swap.start);
        c.swap.end = get_quantity(j, "end", w, Dimension::Time, c.swap.end);
        c.swap.min_detuning_ratio = get_quantity(j, "min_detuning_ratio", w, Dimension::Dimensionless, c.swap.min_detuning_ratio);
        if (!(c.swap.end > c.swap.start)) throw Error(ErrorKind::ValidationError, "swap.end: must exceed swap.start");
    }

    if (doc.contains("stark_shift")) {
        const auto& j = doc.at("stark_shift");
        detail::check_keys(j, "stark_shift", {"currents"});
        if (j.contains("currents")) {
            const auto& arr = j.at("currents");
            if (!arr.is_array()) throw Error(ErrorKind::ValidationError, "stark_shift.currents: expected an array");
            c.stark_currents.clear();
            for (std::size_t i = 0; i < arr.size(); ++i) {
                c.stark_currents.push_back(parse_quantity(arr[i], Dimension::Current, "stark_shift.currents[" + std::to_string(i) + "]"));
            }
        }
    }

    if (doc.contains("adiabaticity")) {
        const auto& j = doc.at("adiabaticity");
        detail::check_keys(j, "adiabaticity", {"threshold"});
        c.adiabatic_threshold = get_quantity(j, "threshold", "adiabaticity", Dimension::Dimensionless, c.adiabatic_threshold);
    }

    c.swap.evolve.dt = 0.005;
    if (doc.contains("numerics")) {
        const auto& j = doc.at("numerics");
        const std::string w = "numerics";
        detail::check_keys(j, w, {"dt", "swap_dt", "stepper", "norm_budget", "record_every"});
        c.evolve.dt = get_quantity(j, "dt", w, Dimension::Time, c.evolve.dt);
        c.swap.evolve.dt = get_quantity(j, "swap_dt", w, Dimension::Time, c.swap.evolve.dt);
        c.evolve.stepper = detail::parse_stepper(get_as<std::string>(j, "stepper", w, "midpoint"));
        c.evolve.norm_budget = get_quantity(j, "norm_budget", w, Dimension::Dimensionless, c.evolve.norm_budget);
        c.evolve.record_every = get_as<std::size_t>(j, "record_every", w, c.evolve.record_every);
    }
    if (!(c.evolve.dt > 0.0) || !(c.swap.evolve.dt > 0.0)) throw Error(ErrorKind::ValidationError, "numerics.dt: must be positive");
    if (c.evolve.record_every == 0) throw Error(ErrorKind::ValidationError, "numerics.record_every: must be positive");
    c.swap.evolve.stepper = c.evolve.stepper;
    c.swap.evolve.norm_budget = c.evolve.norm_budget;
    c.swap.evolve.record_every = c.evolve.record_every;

    if (doc.contains("sweep")) {
        const auto& j = doc.at("sweep");
        detail::check_keys(j, "sweep", {"protocol", "parameter", "values", "baseline", "workers"});
        c.sweep.protocol = get_as<std::string>(j, "protocol", "sweep", c.sweep.protocol);
        if (c.sweep.protocol == "sweep" || !known_protocols().count(c.sweep.protocol)) {
            throw Error(ErrorKind::ValidationError, "sweep.protocol: invalid protocol \"" + c.sweep.protocol + "\"");
        }
        c.sweep.parameter = get_as<std::string>(j, "parameter", "sweep", "");
        if (j.contains("values")) {
            if (!j.at("values").is_array()) throw Error(ErrorKind::ValidationError, "sweep.values: expected an array");
            for (const auto& v : j.at("values")) c.sweep.values.push_back(v);
        }
        c.sweep.baseline = get_as<std::string>(j, "baseline", "sweep", "");
        if (!c.sweep.baseline.empty() && c.sweep.baseline != "pi-pulse") {
            throw Error(ErrorKind::ValidationError, "sweep.baseline: only \"pi-pulse\" is supported");
        }
        c.workers = get_as<std::size_t>(j, "workers", "sweep", c.workers);
    }

    if (doc.contains("thresholds")) {
        const auto& j = doc.at("thresholds");
        if (!j.is_object()) throw Error(ErrorKind::ValidationError, "thresholds: expected an object");
        for (const auto& [name, spec] : j.items()) {
            const std::string w = "thresholds." + name;
            detail::check_keys(spec, w, {"min", "max"});
            ThresholdSpec t;
            if (spec.contains("min")) t.min = get_quantity(spec, "min", w, Dimension::Dimensionless, 0.0);
            if (spec.contains("max")) t.max = get_quantity(spec, "max", w, Dimension::Dimensionless, 0.0);
            c.thresholds[name] = t;
        }
    }

    if (doc.contains("output")) {
        const auto& j = doc.at("output");
        detail::check_keys(j, "output", {"directory", "plots"});
        c.output_directory = get_as<std::string>(j, "directory", "output", "");
        c.plots = get_as<bool>(j, "plots", "output", false);
    }
    return c;
}

/// Parses JSON text; syntax errors carry line and column.
inline Json parse_config_text(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        const auto [line, column] = detail::line_column(text, e.byte);
        throw Error(ErrorKind::ParseError, "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                                               e.what(),
                    line, column);
    }
}

inline RunConfig load_config_text(const std::string& text) { return config_from_json(parse_config_text(text)); }

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::ParseError, "cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_config_text(ss.str());
}

/// Fully resolved config with every default written out.
inline Json dump_config(const RunConfig& c) {
    Json j;
    j["protocol"] = c.protocol;
    j["circuit"] = {{"critical_current", format_quantity(c.circuit.critical_current_ua * 1e3, Dimension::Current)},
                    {"junction_capacitance", format_quantity(c.circuit.junction_capacitance_pf, Dimension::Capacitance)},
                    {"loop_inductance", format_quantity(c.circuit.loop_inductance_ph, Dimension::Inductance)},
                    {"inductance_ratio", c.circuit.inductance_ratio},
                    {"dc_bias", format_quantity(c.circuit.dc_bias_ua * 1e3, Dimension::Current)}};
    j["coupling"] = {{"zeta", c.zeta}};
    j["levels"] = {{"count", c.level_count},
                   {"grid_points", c.bound_states.grid_points},
                   {"left_margin", c.bound_states.left_margin_lengths},
                   {"right_margin", c.bound_states.right_margin_lengths},
                   {"convergence_tolerance", c.bound_states.convergence_tolerance}};
    j["schedule"] = detail::dump_schedule(c.schedule);
    j["initial_state"] = c.initial_state;
    j["calibrate"] = c.calibrate;
    j["transfer_target"] = c.transfer_target;
    j["pi_pulse"] = {{"area", c.pi_pulse_area}, {"width", format_quantity(c.pi_pulse_width, Dimension::Time)}};
    j["swap"] = {{"sweep_rate", format_quantity(c.swap.sweep_rate, Dimension::SweepRate)},
                 {"start", format_quantity(c.swap.start, Dimension::Time)},
                 {"end", format_quantity(c.swap.end, Dimension::Time)},
                 {"min_detuning_ratio", c.swap.min_detuning_ratio}};
    Json currents = Json::array();
    for (double i : c.stark_currents) currents.push_back(format_quantity(i, Dimension::Current));
    j["stark_shift"] = {{"currents", currents}};
    j["adiabaticity"] = {{"threshold", c.adiabatic_threshold}};
    j["numerics"] = {{"dt", format_quantity(c.evolve.dt, Dimension::Time)},
                     {"swap_dt", format_quantity(c.swap.evolve.dt, Dimension::Time)},
                     {"stepper", c.evolve.stepper == Stepper::Magnus4 ? "magnus4" : "midpoint"},
                     {"norm_budget", c.evolve.norm_budget},
                     {"record_every", c.evolve.record_every}};
    Json values = Json::array();
    for (const auto& v : c.sweep.values) values.push_back(v);
    j["sweep"] = {{"protocol", c.sweep.protocol},
                  {"parameter", c.sweep.parameter},
                  {"values", values},
                  {"baseline", c.sweep.baseline},
                  {"workers", c.workers}};
    Json th = Json::object();
    for (const auto& [name, t] : c.thresholds) {
        Json e = Json::object();
        if (t.min) e["min"] = *t.min;
        if (t.max) e["max"] = *t.max;
        th[name] = e;
    }
    j["thresholds"] = th;
    j["output"] = {{"directory", c.output_directory}, {"plots", c.plots}};
    return j;
}

/// Writes `value` at a dotted path ("schedule.pump.amplitude") of a copy of
/// the document, creating intermediate objects as needed.
inline Json with_parameter(const Json& doc, const std::string& path, const Json& value) {
    if (path.empty()) throw Error(ErrorKind::ValidationError, "sweep.parameter: empty path");
    Json out = doc;
    Json* node = &out;
    std::size_t pos = 0;
    while (true) {
        const auto dot = path.find('.', pos);
        const std::string key = path.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos);
        if (key.empty()) throw Error(ErrorKind::ValidationError, "sweep.parameter: malformed path \"" + path + "\"");
        if (node->is_null()) *node = Json::object();
        if (!node->is_object()) throw Error(ErrorKind::ValidationError, "sweep.parameter: \"" + path + "\" does not name a field");
        if (dot == std::string::npos) {
            if (node->contains(key) && (*node)[key].is_structured()) {
                throw Error(ErrorKind::ValidationError, "sweep.parameter: \"" + path + "\" is not a scalar");
            }
            (*node)[key] = value;
            return out;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

/// Pump carrier (rad/ns) resolved against the level structure.
inline double resolve_carrier(const CarrierSpec& spec, double omega10, double omega21) {
    switch (spec.reference) {
        case CarrierReference::Omega10: return omega10;
        case CarrierReference::Omega21: return omega21;
        case CarrierReference::Explicit: return units::ghz_to_rad_per_ns(spec.frequency_ghz);
    }
    return omega10;
}

inline PulseSchedule resolve_schedule(const ScheduleConfig& s, double carrier) {
    PulseSchedule out;
    out.pump = s.pump;
    out.stark = s.stark;
    out.start = s.start;
    out.end = s.end;
    out.carrier = carrier;
    out = out.with_pump_scale(s.pump_scale);
    if (s.time_scale != 1.0) out = out.time_scaled(s.time_scale);
    return out;
}

}  // namespace scrap
