#pragma once

// Two identical phase qubits coupled through a capacitor. Under the RWA the
// nine product states split into blocks that the coupling cannot connect;
// the ones that matter for the swap are
//   ground  {|00>}, swap {|01>, |10>}, spectator {|02>, |11>, |20>}.
// A Stark ramp on qubit 2 sweeps |01> and |10> through their avoided crossing.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <future>
#include <limits>
#include <string>
#include <vector>

#include "scrap/circuit_model.hpp"
#include "scrap/dynamics.hpp"
#include "scrap/errors.hpp"
#include "scrap/pulses.hpp"
#include "scrap/units.hpp"

namespace scrap {

struct RenormalizedCapacitances {
    double zeta = 0.0;
    double junction_pf = 0.0;  // C_J (1 + zeta)
    double coupling_pf = 0.0;  // C_J (1 + zeta) / zeta
};

inline RenormalizedCapacitances renormalized_capacitances(double junction_pf, double coupling_pf) {
    if (!(junction_pf > 0.0)) throw Error(ErrorKind::ValidationError, "junction capacitance must be positive");
    if (!(coupling_pf >= 0.0)) throw Error(ErrorKind::ValidationError, "coupling capacitance must be non-negative");
    if (coupling_pf == 0.0) throw Error(ErrorKind::NoCoupling, "coupling capacitance is zero");
    RenormalizedCapacitances r;
    r.zeta = coupling_pf / (junction_pf + coupling_pf);
    r.junction_pf = junction_pf * (1.0 + r.zeta);
    r.coupling_pf = junction_pf * (1.0 + r.zeta) / r.zeta;
    return r;
}

/// Coupling capacitance that gives the requested zeta.
inline double coupling_for_zeta(double junction_pf, double zeta) {
    if (!(zeta > 0.0 && zeta < 1.0)) throw Error(ErrorKind::ValidationError, "zeta must lie in (0, 1)");
    return zeta * junction_pf / (1.0 - zeta);
}

struct CoupledCircuitParams {
    CircuitParams qubit{};  // both junctions identical
    double coupling_capacitance_pf = coupling_for_zeta(1.2, 0.0017);

    RenormalizedCapacitances capacitances() const {
        return renormalized_capacitances(qubit.junction_capacitance_pf, coupling_capacitance_pf);
    }
    double zeta() const { return capacitances().zeta; }

    /// Single-qubit parameters with the renormalized junction capacitance.
    CircuitParams dressed_qubit() const {
        CircuitParams p = qubit;
        p.junction_capacitance_pf = capacitances().junction_pf;
        return p;
    }

    /// (2 pi / Phi0)^2 hbar / C_m-bar in rad/ns: multiplies p'_ij p'_kl.
    double coupling_coefficient() const { return units::inverse_mass(capacitances().coupling_pf); }

    void validate() const {
        qubit.validate();
        const auto c = capacitances();
        if (!(c.zeta > 0.0 && c.zeta < 1.0)) throw Error(ErrorKind::ValidationError, "zeta must lie in (0, 1)");
    }
};

inline CoupledCircuitParams reference_coupled_circuit() { return CoupledCircuitParams{}; }

inline CoupledCircuitParams coupled_circuit_with_zeta(const CircuitParams& qubit, double zeta) {
    return CoupledCircuitParams{qubit, coupling_for_zeta(qubit.junction_capacitance_pf, zeta)};
}

/// Matrix elements of one qubit that enter the coupled model.
struct QubitElements {
    std::array<double, 3> energies{};           // rad/ns
    Eigen::Matrix3d dipole = Eigen::Matrix3d::Zero();
    Eigen::Matrix3d momentum = Eigen::Matrix3d::Zero();  // signed <i|d/d delta|j>

    double theta() const { return (energies[1] - energies[0]) - (energies[2] - energies[1]); }
};

inline QubitElements qubit_elements(const LevelStructure& levels) {
    if (levels.size() < 3 || levels.dipole.rows() < 3 || levels.momentum.rows() < 3) {
        throw Error(ErrorKind::MissingMatrixElement, "coupled model needs dipole and momentum elements of levels 0..2");
    }
    QubitElements q;
    for (std::size_t i = 0; i < 3; ++i) q.energies[i] = levels.energies[i];
    q.dipole = levels.dipole.topLeftCorner(3, 3);
    q.momentum = levels.momentum.topLeftCorner(3, 3);
    if (!q.dipole.allFinite() || !q.momentum.allFinite()) {
        throw Error(ErrorKind::MissingMatrixElement, "non-finite matrix element");
    }
    return q;
}

enum class Subspace { Ground, Swap, Spectator };

inline std::string_view to_string(Subspace s) {
    switch (s) {
        case Subspace::Ground: return "ground";
        case Subspace::Swap: return "swap";
        case Subspace::Spectator: return "spectator";
    }
    return "ground";
}

struct SubspaceModel {
    Subspace tag = Subspace::Ground;
    TimeDependentHamiltonian hamiltonian;
    std::vector<std::array<int, 2>> basis;  // (qubit 1 level, qubit 2 level)
};

struct CouplingConstants {
    double swap = 0.0;          // |01> <-> |10>
    double spectator_ab = 0.0;  // |02> <-> |11>
    double spectator_ac = 0.0;  // |02> <-> |20>
    double spectator_cb = 0.0;  // |20> <-> |11>
    double theta = 0.0;         // omega10 - omega21
    double stark_swap_per_na = 0.0;  // Stark detuning of |10> relative to |01>, per nA
    double ground_offset = 0.0;      // constant part of E_00
};

struct CoupledModel {
    CoupledCircuitParams params;
    QubitElements elements;
    PulseShape stark;  // chirp current on qubit 2
    CouplingConstants constants;
    SubspaceModel ground;
    SubspaceModel swap;
    SubspaceModel spectator;
    /// Same spectator block in the interaction picture (theta carried as phases).
    InteractionHamiltonian spectator_interaction;
};

namespace detail {

// Coupling between |ij> and |kl> as displayed with p_ij = -i hbar p'_ij:
// g p_a p_b / hbar^2 = -g p'_a p'_b.
inline double momentum_product(double g, double pa, double pb) { return -g * pa * pb; }

}  // namespace detail

/// Builds the three block Hamiltonians for a chirp `stark` on qubit 2.
inline CoupledModel build_subspace_hamiltonians(const CoupledCircuitParams& params, const LevelStructure& levels,
                                                const PulseShape& stark) {
    params.validate();
    stark.validate();
    CoupledModel m;
    m.params = params;
    m.elements = qubit_elements(levels);
    m.stark = stark;
    const auto& q = m.elements;
    const double g = params.coupling_coefficient();
    const double s = params.qubit.stark_prefactor();
    const auto& p = q.momentum;
    const auto& d = q.dipole;

    auto& c = m.constants;
    c.swap = detail::momentum_product(g, p(1, 0), p(1, 0));
    c.spectator_ab = detail::momentum_product(g, p(1, 0), p(1, 2));
    c.spectator_ac = detail::momentum_product(g, p(2, 0), p(0, 2));
    c.spectator_cb = detail::momentum_product(g, p(1, 2), p(1, 0));
    c.theta = q.theta();
    c.stark_swap_per_na = s * (d(1, 1) - d(0, 0));
    c.ground_offset = detail::momentum_product(g, p(0, 0), p(0, 0));
    const double constant_00 = c.ground_offset;

    // E'_i(t) for i = 0, 1, 2 paired with qubit-2 level 2 - i.
    std::array<double, 3> spectator_constant{};
    for (int i = 0; i < 3; ++i) spectator_constant[static_cast<std::size_t>(i)] = detail::momentum_product(g, p(i, i), p(2 - i, 2 - i));

    const CouplingConstants cc = c;
    const Eigen::Matrix3d dip = d;
    m.ground = {Subspace::Ground,
                {1,
                 [stark, s, dip, constant_00](double t) {
                     CMatrix h(1, 1);
                     h(0, 0) = -s * evaluate(stark, t) * dip(0, 0) + constant_00;
                     return h;
                 },
                 Frame::ReducedSchrodinger,
                 {"00"}},
                {{0, 0}}};

    m.swap = {Subspace::Swap,
              {2,
               [stark, cc](double t) {
                   CMatrix h = CMatrix::Zero(2, 2);
                   h(0, 1) = h(1, 0) = cc.swap;
                   h(1, 1) = cc.stark_swap_per_na * evaluate(stark, t);
                   return h;
               },
               Frame::Interaction,
               {"01", "10"}},
              {{0, 1}, {1, 0}}};

    auto spectator_core = [stark, s, dip, cc, spectator_constant](double t) {
        const double i_dc = evaluate(stark, t);
        CMatrix h = CMatrix::Zero(3, 3);
        for (int i = 0; i < 3; ++i) {
            h(i, i) = -s * i_dc * dip(2 - i, 2 - i) + spectator_constant[static_cast<std::size_t>(i)];
        }
        h(0, 1) = h(1, 0) = cc.spectator_ab;
        h(0, 2) = h(2, 0) = cc.spectator_ac;
        h(2, 1) = h(1, 2) = cc.spectator_cb;
        return h;
    };
    m.spectator = {Subspace::Spectator,
                   {3,
                    [spectator_core, cc](double t) {
                        CMatrix h = spectator_core(t);
                        h(0, 0) -= cc.theta;
                        h(2, 2) -= cc.theta;
                        return h;
                    },
                    Frame::ReducedSchrodinger,
                    {"02", "11", "20"}},
                   {{0, 2}, {1, 1}, {2, 0}}};

    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(3, 3);
    w(0, 1) = -cc.theta;
    w(1, 0) = cc.theta;
    w(1, 2) = cc.theta;
    w(2, 1) = -cc.theta;
    m.spectator_interaction = {3, spectator_core, w, {"02", "11", "20"}};
    return m;
}

/// Time for a complete |01> -> |10> transfer at zero detuning, pi / (2 |Omega|).
inline double resonant_swap_period(const CoupledCircuitParams& params, const LevelStructure& levels) {
    const auto m = build_subspace_hamiltonians(params, levels, PulseShape::zero());
    if (m.constants.swap == 0.0) throw Error(ErrorKind::NoCoupling, "swap coupling vanishes");
    return units::pi / (2.0 * std::abs(m.constants.swap));
}

struct SwapOptions {
    double sweep_rate = 2.0;  // nA/ns
    double start = -150.0;    // ns
    double end = 150.0;       // ns
    double min_detuning_ratio = 5.0;
    EvolveOptions evolve{0.005};
    bool reverse_check = true;  // also propagate |01>
};

struct IswapPhases {
    double qubit1 = 0.0;        // Z rotation angle applied to qubit 1
    double qubit2 = 0.0;        // Z rotation angle applied to qubit 2
    double residual = 0.0;      // conditional phase left after local corrections
    double raw_fidelity = 0.0;  // gate fidelity to iSWAP before corrections
    double corrected_fidelity = 0.0;
    Eigen::Matrix4cd unitary;   // computational-basis block of the passage
};

struct TwoQubitResult {
    TrajectoryResult swap;        // from |10>
    TrajectoryResult swap_reverse;  // from |01>
    TrajectoryResult spectator;   // from |11>
    double swap_fidelity = 0.0;   // P(|01>) at the end, from |10>
    double reverse_swap_fidelity = 0.0;  // P(|10>) at the end, from |01>
    double spectator_min = 0.0;   // min_t P(|11>)
    double leakage_max = 0.0;     // max_t P(|02>) + P(|20>)
    double ground_population = 1.0;
    double boundary_detuning_ratio = 0.0;
    double window = 0.0;
    IswapPhases iswap;
};

inline double boundary_detuning_ratio(const CoupledModel& m, double t0, double tf) {
    const double edge = std::min(std::abs(m.constants.stark_swap_per_na * evaluate(m.stark, t0)),
                                 std::abs(m.constants.stark_swap_per_na * evaluate(m.stark, tf)));
    return edge / std::abs(m.constants.swap);
}

inline double gate_fidelity(const Eigen::Matrix4cd& target, const Eigen::Matrix4cd& u) {
    return std::norm((target.adjoint() * u).trace()) / 16.0;
}

/// Local Z corrections that bring the passage closest to iSWAP
/// (|01> -> i|10>, |10> -> i|01>), computed up to a global phase.
inline IswapPhases iswap_phases(Complex ground, const Eigen::Matrix2cd& swap_block, Complex spectator) {
    IswapPhases out;
    Eigen::Matrix4cd u = Eigen::Matrix4cd::Zero();
    u(0, 0) = ground;
    u.block<2, 2>(1, 1) = swap_block;
    u(3, 3) = spectator;
    out.unitary = u;
    Eigen::Matrix4cd iswap = Eigen::Matrix4cd::Zero();
    iswap(0, 0) = 1.0;
    iswap(1, 2) = iswap(2, 1) = Complex(0.0, 1.0);
    iswap(3, 3) = 1.0;
    out.raw_fidelity = gate_fidelity(iswap, u);

    const double g = std::arg(ground);
    // Basis order 00, 01, 10, 11: Z on qubit 2 multiplies |01> and |11>.
    out.qubit2 = units::pi / 2.0 + g - std::arg(swap_block(0, 1));
    out.qubit1 = units::pi / 2.0 + g - std::arg(swap_block(1, 0));
    Eigen::Matrix4cd z = Eigen::Matrix4cd::Identity();
    z(1, 1) = std::exp(Complex(0.0, out.qubit2));
    z(2, 2) = std::exp(Complex(0.0, out.qubit1));
    z(3, 3) = std::exp(Complex(0.0, out.qubit1 + out.qubit2));
    out.corrected_fidelity = gate_fidelity(iswap, z * u);
    out.residual = std::remainder(std::arg(spectator) + out.qubit1 + out.qubit2 - g, units::two_pi);
    return out;
}

/// Chirped swap passage with I_dc(t) = sweep_rate * t on qubit 2.
inline TwoQubitResult run_iswap_passage(const CoupledCircuitParams& params, const LevelStructure& levels,
                                        const SwapOptions& options = {}) {
    if (!(options.end > options.start)) throw Error(ErrorKind::InvalidArgument, "window must have end > start");
    const auto m = build_subspace_hamiltonians(params, levels, PulseShape::linear_ramp(options.sweep_rate, 0.0));
    TwoQubitResult r;
    r.window = options.end - options.start;
    r.boundary_detuning_ratio = boundary_detuning_ratio(m, options.start, options.end);
    if (r.boundary_detuning_ratio < options.min_detuning_ratio) {
        throw Error(ErrorKind::WindowTooShort, "boundary detuning is only " + std::to_string(r.boundary_detuning_ratio) +
                                                   " times the coupling (need " +
                                                   std::to_string(options.min_detuning_ratio) + ")");
    }
    const double t0 = options.start, tf = options.end;
    auto swap_job = std::async(std::launch::async, [&] {
        return evolve(m.swap.hamiltonian, StateVector::basis(2, 1), t0, tf, options.evolve);
    });
    auto reverse_job = std::async(std::launch::async, [&] {
        if (!options.reverse_check) return TrajectoryResult{};
        return evolve(m.swap.hamiltonian, StateVector::basis(2, 0), t0, tf, options.evolve);
    });
    r.spectator = evolve(m.spectator.hamiltonian, StateVector::basis(3, 1), t0, tf, options.evolve);
    r.swap = swap_job.get();
    r.swap_reverse = reverse_job.get();

    r.swap_fidelity = r.swap.final_population(0);
    r.spectator_min = r.spectator.min_population(1);
    for (const auto& p : r.spectator.populations) r.leakage_max = std::max(r.leakage_max, p[0] + p[2]);

    // The ground block is a scalar: its phase is the integral of E_00(t).
    const double e00_phase = -(m.constants.ground_offset * (tf - t0) -
                               params.qubit.stark_prefactor() * m.elements.dipole(0, 0) * integral(m.stark, t0, tf));
    const Complex ground = std::exp(Complex(0.0, e00_phase));
    r.ground_population = std::norm(ground);

    Eigen::Matrix2cd block;
    if (options.reverse_check) {
        r.reverse_swap_fidelity = r.swap_reverse.final_population(1);
        // Columns: images of |01> and |10>.
        block.col(0) = r.swap_reverse.final_state();
        block.col(1) = r.swap.final_state();
        r.iswap = iswap_phases(ground, block, r.spectator.final_state()(1));
    }
    return r;
}

/// Fractional change of omega10 when the Stark current I (nA) biases the qubit.
inline double stark_shift_ratio(const CircuitParams& params, double current_na, const BoundStateOptions& options = {}) {
    if (current_na == 0.0) return 0.0;
    const auto base = solve_bound_states(params, 2, options);
    const auto shifted = solve_bound_states(params, 2, options, current_na);
    return (shifted.transition(1, 0) - base.transition(1, 0)) / base.transition(1, 0);
}

// ---------------------------------------------------------------------------
// Full nine-level model, used to confirm the block structure.

inline int product_index(int q1, int q2) { return 3 * q1 + q2; }

inline std::vector<std::string> product_labels() {
    std::vector<std::string> out;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out.push_back(std::to_string(i) + std::to_string(j));
    return out;
}

/// RWA Hamiltonian on all nine product states, in the frame rotating at
/// omega10 per excitation. Terms |ij><kl| survive only when i + j = k + l.
inline TimeDependentHamiltonian nine_level_hamiltonian(const CoupledCircuitParams& params, const LevelStructure& levels,
                                                       const PulseShape& stark) {
    params.validate();
    const auto q = qubit_elements(levels);
    const double g = params.coupling_coefficient();
    const double s = params.qubit.stark_prefactor();
    const double w10 = q.energies[1] - q.energies[0];
    CMatrix fixed = CMatrix::Zero(9, 9);
    Eigen::VectorXd stark_diag = Eigen::VectorXd::Zero(9);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            const int a = product_index(i, j);
            fixed(a, a) += (q.energies[static_cast<std::size_t>(i)] - q.energies[0]) +
                           (q.energies[static_cast<std::size_t>(j)] - q.energies[0]) - (i + j) * w10;
            stark_diag(a) = -s * q.dipole(j, j);
            for (int k = 0; k < 3; ++k)
                for (int l = 0; l < 3; ++l) {
                    if (i + j != k + l) continue;
                    fixed(a, product_index(k, l)) += detail::momentum_product(g, q.momentum(i, k), q.momentum(j, l));
                }
        }
    return {9,
            [fixed, stark_diag, stark](double t) {
                CMatrix h = fixed;
                const double i_dc = evaluate(stark, t);
                for (int a = 0; a < 9; ++a) h(a, a) += stark_diag(a) * i_dc;
                return h;
            },
            Frame::ReducedSchrodinger,
            product_labels()};
}

/// Product-state indices of each excitation block: {00}, {01,10}, {02,11,20}, {12,21}, {22}.
inline std::vector<std::vector<int>> excitation_blocks() {
    std::vector<std::vector<int>> blocks(5);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) blocks[static_cast<std::size_t>(i + j)].push_back(product_index(i, j));
    return blocks;
}

/// Largest |H_ab| with a and b in different blocks (exactly zero when the
/// block structure holds).
inline double off_block_magnitude(const CMatrix& h) {
    const auto blocks = excitation_blocks();
    std::vector<int> owner(9);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        for (int a : blocks[b]) owner[static_cast<std::size_t>(a)] = static_cast<int>(b);
    double worst = 0.0;
    for (int a = 0; a < 9; ++a)
        for (int b = 0; b < 9; ++b)
            if (owner[static_cast<std::size_t>(a)] != owner[static_cast<std::size_t>(b)]) worst = std::max(worst, std::abs(h(a, b)));
    return worst;
}

struct InvarianceReport {
    double leaked = 0.0;                  // max_t probability outside the initial blocks
    std::vector<double> block_norm_drift;  // per block, max_t |norm^2(t) - norm^2(0)|
};

/// Propagates `initial` under the nine-level model and measures how much
/// probability leaves the blocks it started in.
inline InvarianceReport subspace_invariance_check(const TimeDependentHamiltonian& h9, const CVector& initial, double t0,
                                                  double tf, EvolveOptions options = {}) {
    options.track_adiabatic = false;
    const auto traj = evolve(h9, StateVector::from(initial), t0, tf, options);
    const auto blocks = excitation_blocks();
    std::vector<double> start(blocks.size(), 0.0);
    std::vector<bool> occupied(blocks.size(), false);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        for (int a : blocks[b]) start[b] += std::norm(initial(a));
        occupied[b] = start[b] > 0.0;
    }
    InvarianceReport out;
    out.block_norm_drift.assign(blocks.size(), 0.0);
    for (const auto& p : traj.populations) {
        double outside = 0.0;
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            double w = 0.0;
            for (int a : blocks[b]) w += p[static_cast<std::size_t>(a)];
            out.block_norm_drift[b] = std::max(out.block_norm_drift[b], std::abs(w - start[b]));
            if (!occupied[b]) outside += w;
        }
        out.leaked = std::max(out.leaked, outside);
    }
    return out;
}

}  // namespace scrap
