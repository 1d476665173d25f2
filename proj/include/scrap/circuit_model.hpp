#pragma once

// Flux-biased Josephson junction: tilted-washboard potential, metastable left
// well, its bound states and the dipole / momentum matrix elements that
// parameterize the driven Hamiltonians.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "scrap/errors.hpp"
#include "scrap/tridiagonal.hpp"
#include "scrap/units.hpp"

namespace scrap {

/// Junction and bias parameters. Units are carried in the field names.
struct CircuitParams {
    double critical_current_ua = 8.351;
    double junction_capacitance_pf = 1.2;
    double loop_inductance_ph = 168.0;
    double inductance_ratio = 81.0;  // L / M
    double dc_bias_ua = 923.7;

    void validate() const {
        auto positive = [](double v, const char* name) {
            if (!(v > 0.0) || !std::isfinite(v)) {
                throw Error(ErrorKind::ValidationError, std::string(name) + " must be positive and finite");
            }
        };
        positive(critical_current_ua, "critical_current");
        positive(junction_capacitance_pf, "junction_capacitance");
        positive(loop_inductance_ph, "loop_inductance");
        positive(dc_bias_ua, "dc_bias");
        if (!(inductance_ratio > 1.0) || !std::isfinite(inductance_ratio)) {
            throw Error(ErrorKind::ValidationError, "inductance_ratio L/M must exceed 1");
        }
    }

    double mutual_inductance_ph() const { return loop_inductance_ph / inductance_ratio; }

    /// lambda = 2 pi I0 L / Phi0
    double screening() const {
        return units::two_pi * critical_current_ua * units::micro * loop_inductance_ph * units::pico /
               units::flux_quantum;
    }

    /// phi_b0 = 2 pi I_phi0 M / Phi0
    double bias_phase() const {
        return units::two_pi * dc_bias_ua * units::micro * mutual_inductance_ph() * units::pico /
               units::flux_quantum;
    }

    /// E_J = I0 Phi0 / 2pi, in rad/ns.
    double josephson_energy() const { return units::current_to_rate * critical_current_ua * 1e3; }

    /// 1/m with m = C_J (Phi0/2pi)^2, in rad/ns. The kinetic term is -(1/2m) d^2/d delta^2.
    double inverse_mass() const { return units::inverse_mass(junction_capacitance_pf); }

    /// Pump coupling (Phi0/2pi)/hbar: rad/ns per nA per unit of phase.
    double pump_prefactor() const { return units::current_to_rate; }

    /// Stark coupling (Phi0 M / 2pi L)/hbar: rad/ns per nA per unit of phase.
    double stark_prefactor() const { return units::current_to_rate / inductance_ratio; }
};

inline CircuitParams reference_circuit() { return CircuitParams{}; }

struct PhaseGrid {
    double min = 0.0;
    double max = units::two_pi;
    std::size_t points = 4096;

    void validate() const {
        if (!(min < max)) throw Error(ErrorKind::ValidationError, "phase grid requires min < max");
        if (points < 3) throw Error(ErrorKind::ValidationError, "phase grid requires at least 3 points");
    }
    double spacing() const { return (max - min) / static_cast<double>(points - 1); }
    double at(std::size_t i) const { return min + spacing() * static_cast<double>(i); }
};

struct WellLocation {
    double minimum = 0.0;      // delta*
    double barrier_top = 0.0;  // delta_b
    double minimum_energy = 0.0;
    double barrier_energy = 0.0;
};

struct PotentialProfile {
    PhaseGrid grid;
    std::vector<double> values;
    std::optional<WellLocation> well;
};

/// U(delta) = E_J[(delta - phi_b0)^2 / 2 lambda - cos delta] - (Phi0 M / 2pi L) i_dc delta
///            - (Phi0 / 2pi) i_ac delta, in rad/ns. Currents in nA.
inline double potential_energy(const CircuitParams& p, double delta, double i_dc_na = 0.0, double i_ac_na = 0.0) {
    const double shifted = delta - p.bias_phase();
    return p.josephson_energy() * (shifted * shifted / (2.0 * p.screening()) - std::cos(delta)) -
           p.stark_prefactor() * i_dc_na * delta - p.pump_prefactor() * i_ac_na * delta;
}

/// U0''(delta) in rad/ns.
inline double potential_curvature(const CircuitParams& p, double delta) {
    return p.josephson_energy() * (1.0 / p.screening() + std::cos(delta));
}

namespace detail {

// Vertex of the parabola through three equally spaced samples, as an offset
// from the middle sample in units of the spacing.
inline double parabolic_offset(double left, double mid, double right) {
    const double denom = left - 2.0 * mid + right;
    if (denom == 0.0) return 0.0;
    return std::clamp(0.5 * (left - right) / denom, -1.0, 1.0);
}

}  // namespace detail

/// Leftmost local minimum followed by a local maximum on the sampled profile.
inline WellLocation locate_left_well(const PhaseGrid& grid, const std::vector<double>& values) {
    grid.validate();
    const std::size_t n = values.size();
    if (n != grid.points) throw Error(ErrorKind::InvalidArgument, "profile size does not match grid");
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(values[i] < values[i - 1] && values[i] <= values[i + 1])) continue;
        for (std::size_t j = i + 1; j + 1 < n; ++j) {
            if (values[j] > values[j - 1] && values[j] >= values[j + 1]) {
                const double h = grid.spacing();
                WellLocation w;
                w.minimum = grid.at(i) + h * detail::parabolic_offset(values[i - 1], values[i], values[i + 1]);
                w.barrier_top = grid.at(j) + h * detail::parabolic_offset(values[j - 1], values[j], values[j + 1]);
                w.minimum_energy = values[i];
                w.barrier_energy = values[j];
                return w;
            }
        }
        break;
    }
    throw Error(ErrorKind::NoWellFound, "no local minimum followed by a barrier on the grid");
}

inline WellLocation locate_left_well(const PotentialProfile& profile) {
    return locate_left_well(profile.grid, profile.values);
}

inline PotentialProfile sample_potential(const CircuitParams& params, const PhaseGrid& grid, double i_dc_na = 0.0) {
    grid.validate();
    PotentialProfile profile{grid, {}, std::nullopt};
    profile.values.resize(grid.points);
    for (std::size_t i = 0; i < grid.points; ++i) {
        profile.values[i] = potential_energy(params, grid.at(i), i_dc_na);
    }
    try {
        profile.well = locate_left_well(profile);
    } catch (const Error& e) {
        if (e.kind() != ErrorKind::NoWellFound) throw;
    }
    return profile;
}

/// Eigenstates of -(1/2m) d^2/d delta^2 + U on a hard-wall interval.
struct LevelStructure {
    PhaseGrid grid;                                 // interior points; psi vanishes just outside
    std::vector<double> energies;                   // rad/ns, ascending
    std::vector<std::vector<double>> wavefunctions; // unit L2 norm on the grid
    Eigen::MatrixXd dipole;                         // <i|delta|j>
    Eigen::MatrixXd momentum;                       // <i|d/d delta|j>, signed
    WellLocation well;
    double inverse_mass = 0.0;

    std::size_t size() const { return energies.size(); }
    /// omega_ij = E_i - E_j in rad/ns.
    double transition(std::size_t i, std::size_t j) const { return energies.at(i) - energies.at(j); }
    double transition_ghz(std::size_t i, std::size_t j) const { return units::rad_per_ns_to_ghz(transition(i, j)); }
    std::size_t levels_below_barrier() const {
        return static_cast<std::size_t>(std::count_if(energies.begin(), energies.end(),
                                                      [&](double e) { return e < well.barrier_energy; }));
    }
};

/// <i|delta|j> by grid quadrature.
inline Eigen::MatrixXd dipole_matrix(const PhaseGrid& grid, const std::vector<std::vector<double>>& psi) {
    const std::size_t n = psi.size();
    const double h = grid.spacing();
    Eigen::MatrixXd d(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < grid.points; ++k) s += psi[i][k] * grid.at(k) * psi[j][k];
            d(i, j) = d(j, i) = s * h;
        }
    }
    return d;
}

inline Eigen::MatrixXd dipole_matrix(const LevelStructure& levels) {
    return dipole_matrix(levels.grid, levels.wavefunctions);
}

/// <i|d/d delta|j> with centered differences (psi = 0 beyond the walls).
inline Eigen::MatrixXd momentum_matrix(const PhaseGrid& grid, const std::vector<std::vector<double>>& psi) {
    const std::size_t n = psi.size();
    const std::size_t m = grid.points;
    const double h = grid.spacing();
    Eigen::MatrixXd p(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<double> deriv(m);
        for (std::size_t k = 0; k < m; ++k) {
            const double right = k + 1 < m ? psi[j][k + 1] : 0.0;
            const double left = k > 0 ? psi[j][k - 1] : 0.0;
            deriv[k] = (right - left) / (2.0 * h);
        }
        for (std::size_t i = 0; i < n; ++i) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += psi[i][k] * deriv[k];
            p(i, j) = s * h;
        }
    }
    return p;
}

inline Eigen::MatrixXd momentum_matrix(const LevelStructure& levels) {
    return momentum_matrix(levels.grid, levels.wavefunctions);
}

namespace detail {

// Sign so that the lobe nearest the barrier (last sample above 1% of the peak)
// is positive. This reproduces delta_01 > 0, delta_12 > 0, delta_02 < 0.
inline void fix_sign(std::vector<double>& psi) {
    double peak = 0.0;
    for (double v : psi) peak = std::max(peak, std::abs(v));
    for (auto it = psi.rbegin(); it != psi.rend(); ++it) {
        const double v = *it;
        if (std::abs(v) > 0.01 * peak) {
            if (v < 0) {
                for (double& x : psi) x = -x;
            }
            return;
        }
    }
}

}  // namespace detail

/// Lowest eigenpairs of -(inverse_mass/2) d^2 + U(delta) with hard walls just
/// outside the grid. Wavefunctions are sign-fixed and normalized so that
/// sum psi^2 h = 1. Matrix elements are filled; `well` is left untouched.
inline LevelStructure solve_schrodinger_1d(const PhaseGrid& grid, const std::function<double(double)>& potential,
                                           double inverse_mass, std::size_t n_levels) {
    grid.validate();
    const double h = grid.spacing();
    const double kinetic = 0.5 * inverse_mass / (h * h);
    std::vector<double> diag(grid.points), off(grid.points - 1, -kinetic);
    for (std::size_t i = 0; i < grid.points; ++i) diag[i] = 2.0 * kinetic + potential(grid.at(i));
    auto pairs = lowest_eigenpairs(diag, off, n_levels);

    LevelStructure out;
    out.grid = grid;
    out.inverse_mass = inverse_mass;
    out.energies = std::move(pairs.values);
    out.wavefunctions = std::move(pairs.vectors);
    const double inv_sqrt_h = 1.0 / std::sqrt(h);
    for (auto& psi : out.wavefunctions) {
        for (double& v : psi) v *= inv_sqrt_h;
        detail::fix_sign(psi);
    }
    out.dipole = dipole_matrix(out.grid, out.wavefunctions);
    out.momentum = momentum_matrix(out.grid, out.wavefunctions);
    return out;
}

struct BoundStateOptions {
    std::size_t grid_points = 4096;
    /// Hard walls sit this many harmonic lengths left of the minimum (at least)
    /// and right of the barrier top.
    double left_margin_lengths = 6.0;
    double right_margin_lengths = 1.0;
    /// Coarse grid used to find the well.
    PhaseGrid search_grid{0.0, units::two_pi, 20001};
    bool check_convergence = true;
    double convergence_tolerance = 1e-4;
};

/// Harmonic length 1/sqrt(m omega_p) of the well at delta*.
inline double harmonic_length(const CircuitParams& params, double well_minimum) {
    const double curvature = potential_curvature(params, well_minimum);
    const double mass = 1.0 / params.inverse_mass();
    const double omega = std::sqrt(curvature / mass);
    return 1.0 / std::sqrt(mass * omega);
}

/// Harmonic (small-oscillation) plasma frequency sqrt(U0''(delta*)/m), rad/ns.
inline double plasma_frequency(const CircuitParams& params, double well_minimum) {
    return std::sqrt(potential_curvature(params, well_minimum) * params.inverse_mass());
}

inline WellLocation find_left_well(const CircuitParams& params, const BoundStateOptions& options = {},
                                   double i_dc_na = 0.0) {
    auto profile = sample_potential(params, options.search_grid, i_dc_na);
    if (!profile.well) throw Error(ErrorKind::NoWellFound, "potential has no metastable left well");
    return *profile.well;
}

/// Default truncated domain around the left well.
inline PhaseGrid bound_state_grid(const CircuitParams& params, std::size_t n_levels,
                                  const BoundStateOptions& options = {}, double i_dc_na = 0.0) {
    const WellLocation well = find_left_well(params, options, i_dc_na);
    const double ell = harmonic_length(params, well.minimum);
    const double left = std::max(options.left_margin_lengths, 2.0 * std::sqrt(2.0 * static_cast<double>(n_levels) + 1.0));
    return PhaseGrid{well.minimum - left * ell, well.barrier_top + options.right_margin_lengths * ell,
                     options.grid_points};
}

/// Bound states of the left well on an explicit hard-wall grid.
inline LevelStructure solve_bound_states(const CircuitParams& params, const PhaseGrid& grid, std::size_t n_levels,
                                         const BoundStateOptions& options = {}, double i_dc_na = 0.0) {
    params.validate();
    grid.validate();
    if (n_levels == 0) throw Error(ErrorKind::InvalidArgument, "n_levels must be positive");
    const WellLocation well = find_left_well(params, options, i_dc_na);
    if (grid.min >= well.minimum || grid.max < well.barrier_top) {
        throw Error(ErrorKind::InvalidArgument, "grid must span the well minimum and reach the barrier top");
    }
    auto potential = [&](double d) { return potential_energy(params, d, i_dc_na); };
    LevelStructure levels = solve_schrodinger_1d(grid, potential, params.inverse_mass(), n_levels);
    levels.well = well;

    if (levels.energies.back() >= well.barrier_energy) {
        throw Error(ErrorKind::InsufficientLevels,
                    "only " + std::to_string(levels.levels_below_barrier()) + " of " + std::to_string(n_levels) +
                        " requested states lie below the barrier");
    }

    if (options.check_convergence) {
        PhaseGrid fine = grid;
        fine.points = 2 * grid.points - 1;
        auto refined = solve_schrodinger_1d(fine, potential, params.inverse_mass(), n_levels);
        for (std::size_t i = 0; i < n_levels; ++i) {
            // Relative to the height above the well bottom.
            const double scale = std::abs(levels.energies[i] - well.minimum_energy);
            const double change = std::abs(refined.energies[i] - levels.energies[i]);
            if (change > options.convergence_tolerance * scale) {
                throw Error(ErrorKind::ConvergenceFailure,
                            "level " + std::to_string(i) + " moved by " + std::to_string(change / scale) +
                                " (relative) under grid refinement");
            }
        }
    }
    return levels;
}

inline LevelStructure solve_bound_states(const CircuitParams& params, std::size_t n_levels,
                                         const BoundStateOptions& options = {}, double i_dc_na = 0.0) {
    return solve_bound_states(params, bound_state_grid(params, n_levels, options, i_dc_na), n_levels, options, i_dc_na);
}

/// Number of states of the left well below the barrier top.
inline std::size_t count_bound_states(const CircuitParams& params, const BoundStateOptions& options = {}) {
    BoundStateOptions quick = options;
    quick.check_convergence = false;
    const std::size_t probe = 64;
    const PhaseGrid grid = bound_state_grid(params, 4, quick);
    const WellLocation well = find_left_well(params, quick);
    auto potential = [&](double d) { return potential_energy(params, d); };
    auto levels = solve_schrodinger_1d(grid, potential, params.inverse_mass(), probe);
    return static_cast<std::size_t>(std::count_if(levels.energies.begin(), levels.energies.end(),
                                                   [&](double e) { return e < well.barrier_energy; }));
}

inline std::string format_sig(double value, int digits) {
    std::ostringstream os;
    os << std::setprecision(digits) << value;
    return os.str();
}

/// Human-readable level report: energies in GHz, matrix elements to 4 significant figures.
inline void write_level_report(std::ostream& os, const LevelStructure& levels) {
    const std::size_t n = levels.size();
    os << "left well: minimum delta* = " << format_sig(levels.well.minimum, 6)
       << ", barrier top delta_b = " << format_sig(levels.well.barrier_top, 6) << "\n";
    os << "bound states below barrier: " << levels.levels_below_barrier() << " (of " << n << " computed)\n";
    os << "level energies above well bottom (GHz):\n";
    for (std::size_t i = 0; i < n; ++i) {
        os << "  E" << i << " = "
           << format_sig(units::rad_per_ns_to_ghz(levels.energies[i] - levels.well.minimum_energy), 6) << "\n";
    }
    os << "transition frequencies (GHz):\n";
    for (std::size_t i = 1; i < n; ++i) {
        os << "  omega_" << i << i - 1 << "/2pi = " << format_sig(levels.transition_ghz(i, i - 1), 6) << "\n";
    }
    os << "dipole matrix <i|delta|j>:\n";
    for (std::size_t i = 0; i < n; ++i) {
        os << " ";
        for (std::size_t j = 0; j < n; ++j) os << " " << std::setw(11) << format_sig(levels.dipole(i, j), 4);
        os << "\n";
    }
    os << "momentum matrix <i|d/d delta|j> (signed):\n";
    for (std::size_t i = 0; i < n; ++i) {
        os << " ";
        for (std::size_t j = 0; j < n; ++j) os << " " << std::setw(11) << format_sig(levels.momentum(i, j), 4);
        os << "\n";
    }
}

/// Machine-readable table, one row per (i, j) pair.
inline void write_level_table(std::ostream& os, const LevelStructure& levels) {
    os << "i,j,energy_i_ghz,omega_ij_ghz,delta_ij,p_ij,abs_p_ij\n";
    os << std::setprecision(12);
    for (std::size_t i = 0; i < levels.size(); ++i) {
        for (std::size_t j = 0; j < levels.size(); ++j) {
            os << i << "," << j << ","
               << units::rad_per_ns_to_ghz(levels.energies[i] - levels.well.minimum_energy) << ","
               << levels.transition_ghz(i, j) << "," << levels.dipole(i, j) << "," << levels.momentum(i, j) << ","
               << std::abs(levels.momentum(i, j)) << "\n";
        }
    }
}

}  // namespace scrap
