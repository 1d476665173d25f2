#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "scrap/circuit_model.hpp"
#include "scrap/tridiagonal.hpp"

using namespace scrap;

namespace {

const LevelStructure& reference_levels() {
    static const LevelStructure levels = solve_bound_states(reference_circuit(), 4);
    return levels;
}

}  // namespace

TEST(Units, CurrentToRateIsFluxQuantumOverHbar) {
    // (Phi0 / 2pi) / hbar with Phi0 = h / 2e is 1 / (2e); per nA and per ns.
    EXPECT_NEAR(units::current_to_rate, 1e-18 / (2.0 * 1.602176634e-19), 1e-12);
}

TEST(Units, InverseMassMatchesChargingEnergy) {
    // 1/m = 8 E_C / hbar with E_C = e^2 / 2C.
    const double c = 1.2e-12;
    const double ec = std::pow(1.602176634e-19, 2) / (2.0 * c);
    const double hbar = 6.62607015e-34 / (2.0 * M_PI);
    EXPECT_NEAR(units::inverse_mass(1.2), 8.0 * ec / hbar * 1e-9, 1e-9);
}

TEST(CircuitParams, RejectsNonPositiveValues) {
    CircuitParams p;
    p.junction_capacitance_pf = 0.0;
    EXPECT_THROW(p.validate(), Error);
    p = CircuitParams{};
    p.inductance_ratio = -1.0;
    EXPECT_THROW(p.validate(), Error);
}

TEST(Tridiagonal, MatchesDenseSolverOnRandomMatrix) {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 60;
    std::vector<double> diag(n), off(n - 1);
    for (auto& d : diag) d = 4.0 * u(rng);
    for (auto& o : off) o = u(rng);
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) dense(i, i) = diag[i];
    for (int i = 0; i + 1 < n; ++i) dense(i, i + 1) = dense(i + 1, i) = off[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);

    const auto r = lowest_eigenpairs(diag, off, 6);
    for (int k = 0; k < 6; ++k) {
        EXPECT_NEAR(r.values[k], es.eigenvalues()(k), 1e-10);
        Eigen::Map<const Eigen::VectorXd> v(r.vectors[k].data(), n);
        EXPECT_NEAR(std::abs(v.dot(es.eigenvectors().col(k))), 1.0, 1e-8);
    }
}

TEST(Schrodinger1D, HarmonicOscillatorMatchesClosedForm) {
    // V = k x^2 / 2 with 1/m = mu: E_n = (n + 1/2) omega, <0|x|1> = sqrt(mu / 2 omega),
    // |<0|d/dx|1>| = sqrt(omega / 2 mu).
    const double k = 3.0, mu = 0.8;
    const double omega = std::sqrt(k * mu);
    const PhaseGrid grid{-12.0, 12.0, 6001};
    const auto lv = solve_schrodinger_1d(grid, [&](double x) { return 0.5 * k * x * x; }, mu, 4);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(lv.energies[n], (n + 0.5) * omega, 2e-5 * (n + 0.5) * omega);
    EXPECT_NEAR(std::abs(lv.dipole(0, 1)), std::sqrt(mu / (2.0 * omega)), 1e-5);
    EXPECT_NEAR(std::abs(lv.dipole(1, 2)), std::sqrt(2.0) * std::sqrt(mu / (2.0 * omega)), 1e-5);
    EXPECT_NEAR(std::abs(lv.momentum(0, 1)), std::sqrt(omega / (2.0 * mu)), 1e-4);
    EXPECT_NEAR(lv.dipole(0, 2), 0.0, 1e-8);
    EXPECT_NEAR(lv.dipole(1, 1), 0.0, 1e-8);
}

TEST(Schrodinger1D, MomentumMatrixIsAntisymmetric) {
    const auto& lv = reference_levels();
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(lv.momentum(i, i), 0.0, 1e-9);
        for (int j = 0; j < 4; ++j) EXPECT_NEAR(lv.momentum(i, j), -lv.momentum(j, i), 1e-9);
    }
}

TEST(Schrodinger1D, MomentumFollowsCommutatorIdentity) {
    // <i|d/dx|j> = m (E_j - E_i) <i|x|j> for H = -(1/2m) d^2/dx^2 + V.
    const auto& lv = reference_levels();
    const double mass = 1.0 / lv.inverse_mass;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double predicted = mass * (lv.energies[j] - lv.energies[i]) * lv.dipole(i, j);
            EXPECT_NEAR(lv.momentum(i, j), predicted, 2e-3 * std::abs(predicted));
        }
}

TEST(Potential, LocatesLeftWellAndBarrier) {
    const auto p = reference_circuit();
    const auto well = find_left_well(p);
    EXPECT_GT(well.barrier_top, well.minimum);
    EXPECT_GT(potential_curvature(p, well.minimum), 0.0);
    // Stationary point: dU/d delta = 0 at the minimum.
    const double h = 1e-5;
    const double slope = (potential_energy(p, well.minimum + h) - potential_energy(p, well.minimum - h)) / (2 * h);
    EXPECT_NEAR(slope / p.josephson_energy(), 0.0, 1e-6);
}

TEST(Potential, NoWellWhenBiasRemovesIt) {
    CircuitParams p;
    p.dc_bias_ua = 5000.0;
    EXPECT_THROW(find_left_well(p), Error);
    try {
        find_left_well(p);
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NoWellFound);
    }
}

TEST(BoundStates, ReferenceCircuitTransitionFrequencies) {
    // Reference: omega10/2pi = 10.981 GHz and omega21/2pi = 10.340 GHz, within 1%.
    const auto& lv = reference_levels();
    EXPECT_NEAR(lv.transition_ghz(1, 0), 10.981, 0.01 * 10.981);
    EXPECT_NEAR(lv.transition_ghz(2, 1), 10.340, 0.01 * 10.340);
}

TEST(BoundStates, ReferenceCircuitHasFourLevels) {
    // Reference: four bound states in the left well.
    EXPECT_GE(count_bound_states(reference_circuit()), 4u);
    EXPECT_EQ(reference_levels().levels_below_barrier(), 4u);
}

TEST(BoundStates, DipoleElementsMatchTable) {
    // Reference: delta_00 = 1.571, delta_11 = 1.598, delta_22 = 1.633,
    // delta_01 = 0.076, delta_12 = 0.109, delta_02 = -0.006 (within 0.005).
    const auto& d = reference_levels().dipole;
    EXPECT_NEAR(d(0, 0), 1.571, 0.005);
    EXPECT_NEAR(d(1, 1), 1.598, 0.005);
    EXPECT_NEAR(d(2, 2), 1.633, 0.005);
    EXPECT_NEAR(std::abs(d(0, 1)), 0.076, 0.005);
    EXPECT_NEAR(std::abs(d(1, 2)), 0.109, 0.005);
    EXPECT_NEAR(std::abs(d(0, 2)), 0.006, 0.005);
    EXPECT_DOUBLE_EQ(d(0, 1), d(1, 0));
}

TEST(BoundStates, SignConventionPutsBarrierLobePositive) {
    const auto& d = reference_levels().dipole;
    EXPECT_GT(d(0, 1), 0.0);
    EXPECT_GT(d(1, 2), 0.0);
    EXPECT_LT(d(0, 2), 0.0);
}

TEST(BoundStates, MomentumMagnitudesMatchTable) {
    // Reference: |p'01| = 6.465, |p'12| = 8.761, |p'02| = 1.059, within 2%.
    const auto& p = reference_levels().momentum;
    EXPECT_NEAR(std::abs(p(0, 1)), 6.465, 0.02 * 6.465);
    EXPECT_NEAR(std::abs(p(1, 2)), 8.761, 0.02 * 8.761);
    EXPECT_NEAR(std::abs(p(0, 2)), 1.059, 0.02 * 1.059);
}

TEST(BoundStates, AnharmonicityAgreesWithCubicPerturbationTheory) {
    // Cubic well: omega10 ~ omega_p (1 - 5 hbar omega_p / (36 dU)). The loop
    // term makes the well only approximately cubic, so allow 1%.
    const auto p = reference_circuit();
    const auto& lv = reference_levels();
    const double wp = plasma_frequency(p, lv.well.minimum);
    const double du = lv.well.barrier_energy - lv.well.minimum_energy;
    const double predicted = wp * (1.0 - 5.0 * wp / (36.0 * du));
    EXPECT_NEAR(lv.transition(1, 0), predicted, 0.01 * predicted);
    EXPECT_LT(lv.transition(1, 0), wp);
    EXPECT_LT(lv.transition(2, 1), lv.transition(1, 0));
}

TEST(BoundStates, ConvergedUnderGridRefinement) {
    const auto p = reference_circuit();
    BoundStateOptions coarse;
    coarse.grid_points = 2048;
    coarse.check_convergence = false;
    const auto a = solve_bound_states(p, 3, coarse);
    const auto& b = reference_levels();
    EXPECT_NEAR(a.transition_ghz(1, 0), b.transition_ghz(1, 0), 1e-3);
    EXPECT_NEAR(a.dipole(0, 1), b.dipole(0, 1), 1e-5);
}

TEST(BoundStates, TooManyLevelsRequested) {
    try {
        solve_bound_states(reference_circuit(), 8);
        FAIL() << "expected InsufficientLevels";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::InsufficientLevels);
    }
}

TEST(BoundStates, ShallowerWellWithMoreBias) {
    CircuitParams p;
    p.dc_bias_ua = 930.0;
    EXPECT_LT(count_bound_states(p), count_bound_states(reference_circuit()));
}

TEST(BoundStates, SolveIsFast) {
    const auto start = std::chrono::steady_clock::now();
    solve_bound_states(reference_circuit(), 4);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    EXPECT_LT(seconds, 10.0);
}

TEST(LevelReport, TableHasOneRowPerPair) {
    std::ostringstream os;
    write_level_table(os, reference_levels());
    const std::string s = os.str();
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 16);
    EXPECT_EQ(s.substr(0, s.find('\n')), "i,j,energy_i_ghz,omega_ij_ghz,delta_ij,p_ij,abs_p_ij");
}
