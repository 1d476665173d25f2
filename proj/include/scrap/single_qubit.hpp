#pragma once

// Driven three-level model of one flux-biased phase qubit and the passages
// built on it: population inversion, superposition preparation, Stark phase
// gate, NOT gate and the readout transfer 1 -> 2.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "scrap/circuit_model.hpp"
#include "scrap/dynamics.hpp"
#include "scrap/errors.hpp"
#include "scrap/pulses.hpp"
#include "scrap/units.hpp"

namespace scrap {

/// Lowest three levels of the well plus the drive prefactors.
struct QubitModel3 {
    std::vector<double> energies;  // E_0, E_1, E_2 (rad/ns)
    Eigen::Matrix3d dipole = Eigen::Matrix3d::Zero();
    double pump_prefactor = 0.0;   // (Phi0/2pi)/hbar, rad/ns per nA
    double stark_prefactor = 0.0;  // (Phi0 M/2pi L)/hbar, rad/ns per nA

    double omega10() const { return energies[1] - energies[0]; }
    double omega21() const { return energies[2] - energies[1]; }
    /// nu = omega10 - omega21 (anharmonicity), rad/ns.
    double anharmonicity() const { return omega10() - omega21(); }
    /// Stark shift of level k relative to level 0 per nA (rad/ns / nA), sign included.
    double stark_shift_per_na(std::size_t k) const {
        return -stark_prefactor * (dipole(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) - dipole(0, 0));
    }

    void validate() const {
        if (energies.size() != 3) throw Error(ErrorKind::InvalidArgument, "three-level model needs three energies");
        if (!(anharmonicity() > 0.0)) throw Error(ErrorKind::ValidationError, "model requires omega10 > omega21");
        if (dipole(0, 1) == 0.0) throw Error(ErrorKind::ValidationError, "delta_01 must be nonzero");
    }
};

inline QubitModel3 make_qubit_model(const CircuitParams& params, const LevelStructure& levels) {
    if (levels.size() < 3) throw Error(ErrorKind::InsufficientLevels, "three-level model needs at least three levels");
    QubitModel3 m;
    m.energies = {levels.energies[0], levels.energies[1], levels.energies[2]};
    m.dipole = levels.dipole.topLeftCorner(3, 3);
    m.pump_prefactor = params.pump_prefactor();
    m.stark_prefactor = params.stark_prefactor();
    m.validate();
    return m;
}

inline const std::vector<std::string>& qubit_labels() {
    static const std::vector<std::string> labels{"0", "1", "2"};
    return labels;
}

/// Rotating-frame offsets f_k = (E_k - E_0) - k * carrier.
inline std::vector<double> frame_offsets(const QubitModel3& m, double carrier) {
    return {0.0, m.omega10() - carrier, (m.energies[2] - m.energies[0]) - 2.0 * carrier};
}

namespace detail {

// Couplings and Stark shifts without the frame offsets.
inline CMatrix drive_coefficients(const QubitModel3& m, const PulseSchedule& s, double t) {
    const double kappa = 0.5 * evaluate(s.pump, t);
    const double idc = evaluate(s.stark, t);
    CMatrix h = CMatrix::Zero(3, 3);
    h(0, 1) = h(1, 0) = -m.pump_prefactor * kappa * m.dipole(0, 1);
    h(1, 2) = h(2, 1) = -m.pump_prefactor * kappa * m.dipole(1, 2);
    h(1, 1) = m.stark_shift_per_na(1) * idc;
    h(2, 2) = m.stark_shift_per_na(2) * idc;
    return h;
}

}  // namespace detail

/// RWA Hamiltonian in the frame rotating with the pump carrier:
/// -(Phi0/2pi)[[0, k d01, 0], [k d10, D1(t), k d12], [0, k d21, D2(t)]] + diag(f).
/// With carrier = omega10 the offsets are (0, 0, -nu).
inline TimeDependentHamiltonian driven_hamiltonian(const QubitModel3& m, const PulseSchedule& s) {
    const auto offsets = frame_offsets(m, s.carrier);
    return {3,
            [m, s, offsets](double t) {
                CMatrix h = detail::drive_coefficients(m, s, t);
                for (int k = 0; k < 3; ++k) h(k, k) += offsets[static_cast<std::size_t>(k)];
                return h;
            },
            Frame::ReducedSchrodinger, qubit_labels()};
}

/// Same physics in the interaction picture of H0: the 1-2 coupling carries
/// exp(+-i nu t) when the carrier is omega10.
inline InteractionHamiltonian interaction_hamiltonian(const QubitModel3& m, const PulseSchedule& s) {
    const auto f = frame_offsets(m, s.carrier);
    Eigen::MatrixXd w = Eigen::MatrixXd::Constant(3, 3, std::numeric_limits<double>::quiet_NaN());
    for (int k = 0; k < 3; ++k) w(k, k) = 0.0;
    w(0, 1) = f[0] - f[1];
    w(1, 0) = -w(0, 1);
    w(1, 2) = f[1] - f[2];
    w(2, 1) = -w(1, 2);
    return {3, [m, s](double t) { return detail::drive_coefficients(m, s, t); }, w, qubit_labels()};
}

inline constexpr double carrier_tolerance = 1e-6;  // relative

/// Three-level Hamiltonian for a pump resonant with the 0-1 transition.
inline TimeDependentHamiltonian build_three_level_hamiltonian(const QubitModel3& m, const PulseSchedule& s) {
    if (std::abs(s.carrier - m.omega10()) > carrier_tolerance * m.omega10()) {
        throw Error(ErrorKind::OffResonantPump, "pump carrier " + std::to_string(s.carrier) +
                                                    " rad/ns differs from omega10 = " + std::to_string(m.omega10()));
    }
    return driven_hamiltonian(m, s);
}

/// Effective {0,1} two-level drive: Omega = 2|H01|, Delta = H11 - H00.
inline TwoLevelDrive two_level_drive(const QubitModel3& m, const PulseSchedule& s, double t) {
    const double rabi = std::abs(m.pump_prefactor * evaluate(s.pump, t) * m.dipole(0, 1));
    const double detuning = m.stark_shift_per_na(1) * evaluate(s.stark, t) + frame_offsets(m, s.carrier)[1];
    return {rabi, detuning};
}

inline AdiabaticityReport schedule_adiabaticity(const QubitModel3& m, const PulseSchedule& s, double dt = 0.001,
                                                double threshold = 0.1) {
    return adiabaticity_margin([&](double t) { return two_level_drive(m, s, t); }, s.start, s.end, dt, threshold);
}

inline BoundaryAngles schedule_boundary_angles(const QubitModel3& m, const PulseSchedule& s) {
    return boundary_angles([&](double t) { return two_level_drive(m, s, t); }, s.start, s.end);
}

struct GateResult {
    std::string name;
    CVector initial;
    CVector final_state;
    CVector target;
    double fidelity = 0.0;         // |<target|final>|^2
    double leakage = 0.0;          // max_t P_2(t)
    double relative_phase = 0.0;   // arg(c1) - arg(c0) of the final state, in (-pi, pi]
    double calibration_factor = 1.0;
    TrajectoryResult trajectory;
};

struct SingleQubitOptions {
    EvolveOptions evolve{};
    double transfer_target = 0.99;
    bool calibrate = true;
};

inline double wrap_phase(double phi) {
    phi = std::remainder(phi, units::two_pi);
    if (phi <= -units::pi) phi += units::two_pi;
    return phi;
}

inline double relative_phase(const CVector& psi) { return wrap_phase(std::arg(psi(1)) - std::arg(psi(0))); }

inline double state_fidelity(const CVector& target, const CVector& psi) { return std::norm(target.dot(psi)); }

inline CVector qubit_state(Complex c0, Complex c1) {
    CVector v = CVector::Zero(3);
    v(0) = c0;
    v(1) = c1;
    return v / v.norm();
}

/// Propagates `initial` under the schedule and scores it against `target`.
inline GateResult run_passage(const QubitModel3& m, const PulseSchedule& s, const CVector& initial,
                              const CVector& target, const EvolveOptions& options, std::string name = "passage") {
    const auto h = driven_hamiltonian(m, s);
    GateResult r;
    r.name = std::move(name);
    r.initial = initial;
    r.target = target;
    r.trajectory = evolve(h, StateVector::from(initial), s.start, s.end, options);
    r.final_state = r.trajectory.final_state();
    r.fidelity = state_fidelity(target, r.final_state);
    r.leakage = r.trajectory.max_population(2);
    if (std::abs(r.final_state(0)) > 1e-12 && std::abs(r.final_state(1)) > 1e-12) {
        r.relative_phase = relative_phase(r.final_state);
    }
    return r;
}

inline double transfer_probability(const QubitModel3& m, const PulseSchedule& s, std::size_t from, std::size_t to,
                                   EvolveOptions options) {
    options.track_adiabatic = false;
    options.record_every = std::numeric_limits<std::size_t>::max();
    const auto h = driven_hamiltonian(m, s);
    return evolve(h, StateVector::basis(3, from), s.start, s.end, options).final_population(to);
}

/// Smallest pump scale factor in [lower, upper] for which the transfer
/// from -> to reaches `target`: a coarse scan brackets the first crossing (or a
/// local maximum, refined by golden section), then bisection pins it down.
inline double calibrate_amplitude(const QubitModel3& m, const PulseSchedule& templ, std::size_t from, std::size_t to,
                                  double target, const EvolveOptions& options = {}, double lower = 0.1,
                                  double upper = 10.0, double step = 0.05) {
    if (target > 1.0) {
        throw Error(ErrorKind::CalibrationFailure, "target transfer exceeds 1");
    }
    auto transfer = [&](double k) { return transfer_probability(m, templ.with_pump_scale(k), from, to, options); };
    auto bisect = [&](double below, double above) {
        while (above - below > 1e-4) {
            const double mid = 0.5 * (below + above);
            (transfer(mid) >= target ? above : below) = mid;
        }
        return above;
    };

    double k_prev2 = lower, k_prev = lower;
    double f_prev2 = transfer(lower), f_prev = f_prev2;
    if (f_prev >= target) return lower;
    for (double k = lower + step; k <= upper + 1e-12; k += step) {
        const double f = transfer(k);
        if (f >= target) return bisect(k_prev, k);
        if (f_prev > f_prev2 && f_prev > f) {
            // Golden-section search for the local maximum in [k_prev2, k].
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            double a = k_prev2, b = k;
            double c = b - g * (b - a), d = a + g * (b - a);
            double fc = transfer(c), fd = transfer(d);
            for (int it = 0; it < 40 && b - a > 1e-5; ++it) {
                if (fc > fd) {
                    b = d; d = c; fd = fc; c = b - g * (b - a); fc = transfer(c);
                } else {
                    a = c; c = d; fc = fd; d = a + g * (b - a); fd = transfer(d);
                }
            }
            const double k_best = fc > fd ? c : d;
            if (std::max(fc, fd) >= target) return bisect(k_prev2, k_best);
        }
        k_prev2 = k_prev;
        f_prev2 = f_prev;
        k_prev = k;
        f_prev = f;
    }
    throw Error(ErrorKind::CalibrationFailure,
                "no pump scale in [" + std::to_string(lower) + ", " + std::to_string(upper) + "] reaches " +
                    std::to_string(target));
}

/// Population inversion. Starting in |1> the target is |0> and vice versa.
/// If the schedule as given misses the transfer target the pump amplitude is
/// calibrated first and the factor recorded.
inline GateResult run_inversion(const QubitModel3& m, const PulseSchedule& s, std::size_t initial = 1,
                                const SingleQubitOptions& options = {}) {
    const std::size_t target_level = initial == 0 ? 1 : 0;
    CVector psi0 = CVector::Zero(3), target = CVector::Zero(3);
    psi0(static_cast<Eigen::Index>(initial)) = 1.0;
    target(static_cast<Eigen::Index>(target_level)) = 1.0;
    auto r = run_passage(m, s, psi0, target, options.evolve, "inversion");
    if (options.calibrate && r.fidelity < options.transfer_target) {
        const double k = calibrate_amplitude(m, s, initial, target_level, options.transfer_target, options.evolve);
        r = run_passage(m, s.with_pump_scale(k), psi0, target, options.evolve, "inversion");
        r.calibration_factor = k;
    }
    return r;
}

/// Superposition preparation: |1> -> (|0> + |1>)/sqrt2, |0> -> (|0> - |1>)/sqrt2.
inline GateResult run_hadamard(const QubitModel3& m, const PulseSchedule& s, std::size_t initial = 1,
                               const SingleQubitOptions& options = {}) {
    CVector psi0 = CVector::Zero(3);
    psi0(static_cast<Eigen::Index>(initial)) = 1.0;
    const CVector target = initial == 1 ? qubit_state(1.0, 1.0) : qubit_state(1.0, -1.0);
    return run_passage(m, s, psi0, target, options.evolve, "hadamard");
}

struct PhaseGateResult {
    GateResult gate;
    double simulated_phase = 0.0;   // arg(c1/c0) after the pulse
    double expected_phase = 0.0;    // -integral of Delta(t) dt, closed form
    double max_population_change = 0.0;
    Eigen::Matrix2cd unitary;       // U_z(alpha) = diag(1, e^{i alpha})
};

/// Stark-only pulse: |0> -> |0>, |1> -> e^{i alpha}|1> with
/// alpha = -integral of Delta(t) = -(stark shift of |1>) * integral of I_dc.
inline PhaseGateResult phase_gate(const QubitModel3& m, const PulseShape& stark, double t0, double tf,
                                  const EvolveOptions& options = {}) {
    PulseSchedule s;
    s.pump = PulseShape::zero();
    s.stark = stark;
    s.start = t0;
    s.end = tf;
    s.carrier = m.omega10();
    const CVector psi0 = qubit_state(1.0, 1.0);

    PhaseGateResult out;
    out.expected_phase = -m.stark_shift_per_na(1) * integral(stark, t0, tf);
    out.gate = run_passage(m, s, psi0, qubit_state(1.0, std::exp(Complex(0.0, out.expected_phase))), options,
                           "phase-gate");
    out.simulated_phase = out.gate.relative_phase;
    for (const auto& p : out.gate.trajectory.populations) {
        for (std::size_t i = 0; i < 3; ++i) {
            out.max_population_change = std::max(out.max_population_change,
                                                 std::abs(p[i] - out.gate.trajectory.populations.front()[i]));
        }
    }
    out.unitary = Eigen::Matrix2cd::Identity();
    out.unitary(1, 1) = std::exp(Complex(0.0, out.simulated_phase));
    return out;
}

/// Gaussian Stark amplitude (nA) that produces phase `alpha` for the given width.
inline double stark_amplitude_for_phase(const QubitModel3& m, double width, double alpha) {
    return alpha / (-m.stark_shift_per_na(1) * width * std::sqrt(units::pi));
}

/// Phase gate built from a Gaussian Stark pulse of the given width, centered at 0.
inline PulseShape phase_pulse(const QubitModel3& m, double alpha, double width = 5.0) {
    if (alpha == 0.0) return PulseShape::zero();
    return PulseShape::gaussian(stark_amplitude_for_phase(m, width, alpha), 0.0, width);
}

inline double process_fidelity(const Eigen::Matrix2cd& target, const Eigen::Matrix2cd& u) {
    return std::norm((target.adjoint() * u).trace()) / 4.0;
}

struct NotGateResult {
    CMatrix unitary;                  // 3x3: phase correction after inversion
    Eigen::Matrix2cd qubit_block;
    double correction_phase = 0.0;    // alpha applied by the Stark phase gate
    double process_fidelity = 0.0;    // to sigma_x, global phase removed
    double fixed_pi_process_fidelity = 0.0;  // same with a U_z(pi) correction
    double calibration_factor = 1.0;
    GateResult from_zero;
};

/// NOT = U_z(alpha) H_inv. The correction angle is measured from the passage
/// propagator so that |0> -> |1> and |1> -> |0> carry equal phases; for a
/// passage with |0> -> -|1>, |1> -> |0> it is pi.
inline NotGateResult not_gate(const QubitModel3& m, const PulseSchedule& inversion,
                              const SingleQubitOptions& options = {}) {
    NotGateResult out;
    const auto calibrated = run_inversion(m, inversion, 1, options);
    out.calibration_factor = calibrated.calibration_factor;
    const PulseSchedule inv = inversion.with_pump_scale(out.calibration_factor);
    const CMatrix u_inv = propagator(driven_hamiltonian(m, inv), inv.start, inv.end, options.evolve);

    out.correction_phase = wrap_phase(std::arg(u_inv(0, 1)) - std::arg(u_inv(1, 0)));
    auto correction = [&](double alpha) {
        const PulseShape pulse = phase_pulse(m, alpha);
        PulseSchedule s;
        s.stark = pulse;
        s.start = -20.0;
        s.end = 20.0;
        s.carrier = m.omega10();
        return CMatrix(propagator(driven_hamiltonian(m, s), s.start, s.end, options.evolve));
    };
    Eigen::Matrix2cd sigma_x;
    sigma_x << 0, 1, 1, 0;

    out.unitary = correction(out.correction_phase) * u_inv;
    out.qubit_block = out.unitary.topLeftCorner(2, 2);
    out.process_fidelity = process_fidelity(sigma_x, out.qubit_block);
    const CMatrix literal = correction(units::pi) * u_inv;
    out.fixed_pi_process_fidelity = process_fidelity(sigma_x, literal.topLeftCorner(2, 2));

    out.from_zero.name = "not-gate";
    out.from_zero.initial = qubit_state(1.0, 0.0);
    out.from_zero.final_state = out.unitary * out.from_zero.initial;
    out.from_zero.target = qubit_state(0.0, 1.0);
    out.from_zero.fidelity = state_fidelity(out.from_zero.target, out.from_zero.final_state);
    out.from_zero.leakage = calibrated.leakage;
    out.from_zero.calibration_factor = out.calibration_factor;
    return out;
}

/// Inversion pulse shapes with the pump carrier on the 1-2 transition.
inline PulseSchedule make_readout_schedule(const QubitModel3& m) {
    PulseSchedule s = make_inversion_schedule(m.omega21());
    return s;
}

struct ReadoutResult {
    GateResult transfer;     // |1> -> |2>
    GateResult selectivity;  // |0> stays
    double calibration_factor = 1.0;
};

/// Moves |1> to |2> (standing in for the readout state) while leaving |0> alone.
inline ReadoutResult readout_transfer(const QubitModel3& m, const SingleQubitOptions& options = {},
                                      std::optional<PulseSchedule> schedule = std::nullopt) {
    const PulseSchedule templ = schedule ? *schedule : make_readout_schedule(m);
    ReadoutResult out;
    out.calibration_factor = options.calibrate
                                 ? calibrate_amplitude(m, templ, 1, 2, options.transfer_target, options.evolve)
                                 : 1.0;
    const PulseSchedule s = templ.with_pump_scale(out.calibration_factor);
    CVector one = CVector::Zero(3), two = CVector::Zero(3), zero = CVector::Zero(3);
    one(1) = 1.0;
    two(2) = 1.0;
    zero(0) = 1.0;
    out.transfer = run_passage(m, s, one, two, options.evolve, "readout");
    out.transfer.calibration_factor = out.calibration_factor;
    out.selectivity = run_passage(m, s, zero, zero, options.evolve, "readout-selectivity");
    out.selectivity.calibration_factor = out.calibration_factor;
    return out;
}

/// Resonant two-level pi pulse: H = (Omega(t)/2) sigma_x with a Gaussian
/// Omega of the given width whose area is `area`. Returns P_1 at the end.
inline double simulate_resonant_pulse(double area, double width = 2.5, const EvolveOptions& options = {}) {
    const double peak = area / (width * std::sqrt(units::pi));
    const PulseShape shape = PulseShape::gaussian(peak, 0.0, width);
    TimeDependentHamiltonian h{2,
                               [shape](double t) {
                                   CMatrix m = CMatrix::Zero(2, 2);
                                   m(0, 1) = m(1, 0) = 0.5 * evaluate(shape, t);
                                   return m;
                               },
                               Frame::Interaction,
                               {"0", "1"}};
    EvolveOptions o = options;
    o.track_adiabatic = false;
    const double half = 6.0 * width;
    return evolve(h, StateVector::basis(2, 0), -half, half, o).final_population(1);
}

}  // namespace scrap
