#pragma once

// Pulse shapes for the pump and Stark channels, mixing angle, and the
// adiabaticity margin of a two-level passage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "scrap/errors.hpp"
#include "scrap/units.hpp"

namespace scrap {

enum class PulseKind { Zero, Constant, Gaussian, LinearRamp };

inline std::string_view to_string(PulseKind kind) {
    switch (kind) {
        case PulseKind::Zero: return "zero";
        case PulseKind::Constant: return "constant";
        case PulseKind::Gaussian: return "gaussian";
        case PulseKind::LinearRamp: return "linear_ramp";
    }
    return "zero";
}

struct ClipWindow {
    double on = 0.0;   // ns
    double off = 0.0;  // ns
    bool operator==(const ClipWindow&) const = default;
};

/// Current waveform in nA. Gaussian: amplitude * exp(-(t - center)^2 / width^2).
/// Linear ramp: slope * (t - start). Outside the clip window the value is exactly 0.
struct PulseShape {
    PulseKind kind = PulseKind::Zero;
    double amplitude = 0.0;  // nA (gaussian, constant)
    double center = 0.0;     // ns (gaussian)
    double width = 1.0;      // ns (gaussian)
    double slope = 0.0;      // nA/ns (ramp)
    double start = 0.0;      // ns (ramp)
    std::optional<ClipWindow> clip;

    static PulseShape zero() { return {}; }
    static PulseShape constant(double amplitude) {
        PulseShape p;
        p.kind = PulseKind::Constant;
        p.amplitude = amplitude;
        return p;
    }
    static PulseShape gaussian(double amplitude, double center, double width) {
        PulseShape p;
        p.kind = PulseKind::Gaussian;
        p.amplitude = amplitude;
        p.center = center;
        p.width = width;
        return p;
    }
    static PulseShape linear_ramp(double slope, double start) {
        PulseShape p;
        p.kind = PulseKind::LinearRamp;
        p.slope = slope;
        p.start = start;
        return p;
    }

    PulseShape clipped(double on, double off) const {
        PulseShape p = *this;
        p.clip = ClipWindow{on, off};
        return p;
    }

    void validate() const {
        if (kind == PulseKind::Gaussian && !(width > 0.0)) {
            throw Error(ErrorKind::ValidationError, "gaussian width must be positive");
        }
        if (clip && !(clip->on < clip->off)) {
            throw Error(ErrorKind::ValidationError, "clip window requires on < off");
        }
        for (double v : {amplitude, center, width, slope, start}) {
            if (!std::isfinite(v)) throw Error(ErrorKind::ValidationError, "pulse parameters must be finite");
        }
    }

    /// Same waveform with its current multiplied by `factor`.
    PulseShape scaled(double factor) const {
        PulseShape p = *this;
        p.amplitude *= factor;
        p.slope *= factor;
        return p;
    }

    /// f(t / factor): stretches the time axis by `factor` (factor < 1 compresses).
    PulseShape time_scaled(double factor) const {
        PulseShape p = *this;
        p.center *= factor;
        p.width *= factor;
        p.start *= factor;
        p.slope /= factor;
        if (p.clip) p.clip = ClipWindow{clip->on * factor, clip->off * factor};
        return p;
    }

    /// f(-t).
    PulseShape time_reversed() const {
        PulseShape p = *this;
        p.center = -center;
        p.start = -start;
        p.slope = -slope;
        if (p.clip) p.clip = ClipWindow{-clip->off, -clip->on};
        return p;
    }

    bool operator==(const PulseShape&) const = default;
};

inline double evaluate(const PulseShape& pulse, double t) {
    if (pulse.clip && (t < pulse.clip->on || t > pulse.clip->off)) return 0.0;
    switch (pulse.kind) {
        case PulseKind::Zero: return 0.0;
        case PulseKind::Constant: return pulse.amplitude;
        case PulseKind::Gaussian: {
            const double x = (t - pulse.center) / pulse.width;
            return pulse.amplitude * std::exp(-x * x);
        }
        case PulseKind::LinearRamp: return pulse.slope * (t - pulse.start);
    }
    return 0.0;
}

/// Closed-form integral of the pulse over [a, b] in nA ns.
inline double integral(const PulseShape& pulse, double a, double b) {
    if (pulse.clip) {
        a = std::max(a, pulse.clip->on);
        b = std::min(b, pulse.clip->off);
        if (b <= a) return 0.0;
    }
    switch (pulse.kind) {
        case PulseKind::Zero: return 0.0;
        case PulseKind::Constant: return pulse.amplitude * (b - a);
        case PulseKind::Gaussian:
            return pulse.amplitude * pulse.width * std::sqrt(units::pi) * 0.5 *
                   (std::erf((b - pulse.center) / pulse.width) - std::erf((a - pulse.center) / pulse.width));
        case PulseKind::LinearRamp: {
            const double fa = a - pulse.start, fb = b - pulse.start;
            return 0.5 * pulse.slope * (fb * fb - fa * fa);
        }
    }
    return 0.0;
}

/// Pump and Stark channels over a simulation window. `carrier` is the pump
/// carrier angular frequency in rad/ns.
struct PulseSchedule {
    PulseShape pump;
    PulseShape stark;
    double start = -10.0;  // ns
    double end = 10.0;     // ns
    double carrier = 0.0;  // rad/ns

    void validate() const {
        if (!(start < end)) throw Error(ErrorKind::ValidationError, "schedule window requires start < end");
        pump.validate();
        stark.validate();
        for (double t : {start, end}) {
            if (!std::isfinite(evaluate(pump, t)) || !std::isfinite(evaluate(stark, t))) {
                throw Error(ErrorKind::ValidationError, "pulse channels must be finite over the window");
            }
        }
    }

    double duration() const { return end - start; }

    PulseSchedule with_pump_scale(double factor) const {
        PulseSchedule s = *this;
        s.pump = pump.scaled(factor);
        return s;
    }

    PulseSchedule time_scaled(double factor) const {
        PulseSchedule s = *this;
        s.pump = pump.time_scaled(factor);
        s.stark = stark.time_scaled(factor);
        s.start = start * factor;
        s.end = end * factor;
        return s;
    }

    PulseSchedule time_reversed() const {
        PulseSchedule s = *this;
        s.pump = pump.time_reversed();
        s.stark = stark.time_reversed();
        s.start = -end;
        s.end = -start;
        return s;
    }
};

/// Population inversion: Stark 5 exp(-t^2/5^2) nA, pump 2.98 exp(-t^2/2.5^2) nA.
/// The pump is narrower, so it switches off before the Stark pulse.
inline PulseSchedule make_inversion_schedule(double carrier) {
    PulseSchedule s;
    s.stark = PulseShape::gaussian(5.0, 0.0, 5.0);
    s.pump = PulseShape::gaussian(2.98, 0.0, 2.5);
    s.start = -10.0;
    s.end = 10.0;
    s.carrier = carrier;
    return s;
}

/// Superposition preparation: Stark 5 exp(-(t+5)^2/2.5^2) nA precedes the pump
/// 1.495 exp(-t^2/2.5^2) nA and switches off first.
inline PulseSchedule make_hadamard_schedule(double carrier) {
    PulseSchedule s;
    s.stark = PulseShape::gaussian(5.0, -5.0, 2.5);
    s.pump = PulseShape::gaussian(1.495, 0.0, 2.5);
    s.start = -15.0;
    s.end = 10.0;
    s.carrier = carrier;
    return s;
}

/// Mixing angle with tan(2 theta) = Omega / Delta, theta in [0, pi/2].
/// Returns nullopt (degenerate) when both inputs vanish. The sign of Omega is a
/// basis phase and is dropped.
inline std::optional<double> mixing_angle(double rabi, double detuning) {
    if (rabi == 0.0 && detuning == 0.0) return std::nullopt;
    return 0.5 * std::atan2(std::abs(rabi), detuning);
}

/// Rabi frequency and signed detuning of an effective two-level problem
/// H = 1/2 [[0, Omega], [Omega, 2 Delta]], both in rad/ns.
struct TwoLevelDrive {
    double rabi = 0.0;
    double detuning = 0.0;
};

struct AdiabaticityReport {
    std::vector<double> times;
    std::vector<double> theta;
    std::vector<double> margin;          // eta(t)
    std::vector<double> rate_over_gap;   // |d theta/dt| / (mu+ - mu-) from differentiated theta
    std::vector<double> gap;             // mu+ - mu- = sqrt(Delta^2 + Omega^2)
    double min_gap = 0.0;
    double max_margin = 0.0;
    double max_margin_time = 0.0;
    double threshold = 0.1;
    bool adiabatic = false;
};

/// eta(t) = 1/2 |Omega dDelta/dt - Delta dOmega/dt| / (Delta^2 + Omega^2)^{3/2}
/// sampled on [t0, tf] with step dt. `drive(t)` returns a TwoLevelDrive.
template <class DriveFn>
AdiabaticityReport adiabaticity_margin(DriveFn&& drive, double t0, double tf, double dt, double threshold = 0.1) {
    if (!(dt > 0.0) || !(t0 < tf)) throw Error(ErrorKind::InvalidArgument, "adiabaticity_margin: bad time grid");
    const auto steps = static_cast<std::size_t>(std::llround((tf - t0) / dt));
    const double h = (tf - t0) / static_cast<double>(steps);

    // Samples at t0 - h ... tf + h so every grid point has a centered difference.
    std::vector<TwoLevelDrive> samples(steps + 3);
    for (std::size_t k = 0; k < samples.size(); ++k) {
        samples[k] = drive(t0 + (static_cast<double>(k) - 1.0) * h);
    }
    std::vector<double> theta_ext(samples.size());
    for (std::size_t k = 0; k < samples.size(); ++k) {
        const auto angle = mixing_angle(samples[k].rabi, samples[k].detuning);
        if (!angle) {
            const double t = t0 + (static_cast<double>(k) - 1.0) * h;
            if (k == 0 || k + 1 == samples.size()) {
                theta_ext[k] = k == 0 ? 0.0 : theta_ext[k - 1];
                continue;
            }
            throw Error(ErrorKind::DegenerateGap, "Delta^2 + Omega^2 = 0 at t = " + std::to_string(t) + " ns");
        }
        theta_ext[k] = *angle;
    }

    AdiabaticityReport report;
    report.threshold = threshold;
    report.min_gap = std::numeric_limits<double>::infinity();
    report.max_margin = 0.0;
    for (std::size_t k = 1; k + 1 < samples.size(); ++k) {
        const double t = t0 + (static_cast<double>(k) - 1.0) * h;
        const auto& s = samples[k];
        const double d_rabi = (samples[k + 1].rabi - samples[k - 1].rabi) / (2.0 * h);
        const double d_det = (samples[k + 1].detuning - samples[k - 1].detuning) / (2.0 * h);
        const double norm2 = s.detuning * s.detuning + s.rabi * s.rabi;
        const double gap = std::sqrt(norm2);
        const double eta = 0.5 * std::abs(s.rabi * d_det - s.detuning * d_rabi) / (norm2 * gap);
        const double theta_dot = (theta_ext[k + 1] - theta_ext[k - 1]) / (2.0 * h);
        report.times.push_back(t);
        report.theta.push_back(theta_ext[k]);
        report.margin.push_back(eta);
        report.rate_over_gap.push_back(std::abs(theta_dot) / gap);
        report.gap.push_back(gap);
        report.min_gap = std::min(report.min_gap, gap);
        if (eta > report.max_margin) {
            report.max_margin = eta;
            report.max_margin_time = t;
        }
    }
    report.adiabatic = report.max_margin <= threshold;
    return report;
}

/// Mixing angles at the schedule boundaries, measured rather than assumed.
struct BoundaryAngles {
    std::optional<double> start;
    std::optional<double> end;
    bool constant = false;  // theta does not change over the window
};

template <class DriveFn>
BoundaryAngles boundary_angles(DriveFn&& drive, double t0, double tf, std::size_t samples = 2001) {
    BoundaryAngles out;
    auto at = [&](double t) {
        const TwoLevelDrive d = drive(t);
        return mixing_angle(d.rabi, d.detuning);
    };
    out.start = at(t0);
    out.end = at(tf);
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t k = 0; k < samples; ++k) {
        const double t = t0 + (tf - t0) * static_cast<double>(k) / static_cast<double>(samples - 1);
        if (auto a = at(t)) {
            lo = std::min(lo, *a);
            hi = std::max(hi, *a);
        }
    }
    out.constant = hi - lo < 1e-12;
    return out;
}

}  // namespace scrap
