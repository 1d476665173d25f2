#pragma once

// Internal unit system: hbar = 1, time in ns, energy and angular frequency in
// rad/ns, current in nA, capacitance in pF, inductance in pH. Phases are
// dimensionless. Conversions from SI happen only in this header.

#include <numbers>

namespace scrap::units {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018 exact values.
inline constexpr double elementary_charge = 1.602176634e-19;  // C
inline constexpr double planck = 6.62607015e-34;              // J s
inline constexpr double hbar = planck / two_pi;               // J s
inline constexpr double flux_quantum = planck / (2.0 * elementary_charge);  // Wb

inline constexpr double nano = 1e-9;
inline constexpr double pico = 1e-12;
inline constexpr double micro = 1e-6;

/// (Phi0 / 2pi) / hbar expressed in rad/ns per nA. Multiplying a current in nA
/// and a dimensionless phase matrix element by this gives an energy in rad/ns.
inline constexpr double current_to_rate = 1.0 / (2.0 * elementary_charge) * nano * nano;

/// hbar / ((Phi0/2pi)^2 C) in rad/ns, for C in pF. Equals 1/m for the phase
/// particle of mass m = C (Phi0/2pi)^2 / hbar.
inline constexpr double inverse_mass(double capacitance_pf) {
    const double phi_reduced = flux_quantum / two_pi;
    return hbar / (phi_reduced * phi_reduced * capacitance_pf * pico) * nano;
}

inline constexpr double ghz_to_rad_per_ns(double ghz) { return two_pi * ghz; }
inline constexpr double rad_per_ns_to_ghz(double w) { return w / two_pi; }

}  // namespace scrap::units
