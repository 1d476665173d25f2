#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>
#include <sstream>

#include "scrap/dynamics.hpp"
#include "scrap/pulses.hpp"

using namespace scrap;

namespace {

CMatrix random_hermitian(int n, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> g;
    CMatrix a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = Complex(g(rng), g(rng));
    return 0.5 * (a + a.adjoint());
}

// H = [[0, Omega/2], [Omega/2, Delta]] with Gaussian Omega and a Stark-like Delta.
TimeDependentHamiltonian two_level(double rabi_peak, double det_peak, double det_offset) {
    const auto pump = PulseShape::gaussian(rabi_peak, 0.0, 2.5);
    const auto stark = PulseShape::gaussian(det_peak, 0.0, 5.0);
    return {2,
            [=](double t) {
                CMatrix h = CMatrix::Zero(2, 2);
                h(0, 1) = h(1, 0) = 0.5 * evaluate(pump, t);
                h(1, 1) = evaluate(stark, t) + det_offset;
                return h;
            },
            Frame::ReducedSchrodinger,
            {"0", "1"}};
}

}  // namespace

TEST(UnitaryExponential, MatchesPadeReference) {
    for (unsigned seed = 1; seed <= 5; ++seed) {
        const CMatrix k = random_hermitian(4, seed);
        const CMatrix expected = (Complex(0.0, -1.0) * k).exp();
        EXPECT_LT((unitary_exponential(k) - expected).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(UnitaryExponential, IsUnitary) {
    const CMatrix u = unitary_exponential(random_hermitian(5, 11) * 7.0);
    EXPECT_LT((u.adjoint() * u - CMatrix::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Evolve, ConstantHamiltonianIsExact) {
    const CMatrix h = random_hermitian(3, 3);
    const auto traj = evolve(constant_hamiltonian(h), StateVector::basis(3, 0), 0.0, 2.0, {0.01});
    const CVector exact = (Complex(0.0, -2.0) * h).exp().col(0);
    EXPECT_LT((traj.final_state() - exact).norm(), 1e-11);
}

TEST(Evolve, ResonantPulseFollowsAreaFormula) {
    // P_e = (1 - cos A) / 2 for H = (Omega(t)/2) sigma_x.
    for (double area : {0.0, M_PI / 4, M_PI / 2, M_PI, 2 * M_PI}) {
        const double peak = area / (2.5 * std::sqrt(M_PI));
        const auto h = two_level(peak, 0.0, 0.0);
        EvolveOptions o;
        o.track_adiabatic = false;
        const auto traj = evolve(h, StateVector::basis(2, 0), -15.0, 15.0, o);
        EXPECT_NEAR(traj.final_population(1), pi_pulse_analytic(area), 1e-6) << "area " << area;
    }
}

TEST(Evolve, NormDriftWithinBudget) {
    const auto traj = evolve(two_level(2.0, 3.0, -1.0), StateVector::basis(2, 1), -10, 10);
    EXPECT_LE(traj.max_norm_drift, 1e-9);
    for (double n : traj.norms) EXPECT_NEAR(n, 1.0, 1e-9);
}

TEST(Evolve, AdiabaticPopulationsSumToOne) {
    const auto traj = evolve(two_level(2.0, 3.0, -1.0), StateVector::basis(2, 1), -10, 10);
    ASSERT_EQ(traj.adiabatic_populations.size(), traj.times.size());
    for (const auto& a : traj.adiabatic_populations) EXPECT_NEAR(a[0] + a[1], 1.0, 1e-9);
}

TEST(Evolve, ImpossibleNormBudgetFailsStep) {
    // Each exact step still rounds at ~1e-16; a zero budget cannot be met.
    EvolveOptions o;
    o.norm_budget = 0.0;
    o.max_halvings = 2;
    o.track_adiabatic = false;
    try {
        evolve(constant_hamiltonian(random_hermitian(4, 4) * 50.0), StateVector::basis(4, 0), 0.0, 10.0, o);
        FAIL() << "expected StepFailure";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::StepFailure);
    }
}

TEST(Evolve, RejectsBadArguments) {
    const auto h = constant_hamiltonian(CMatrix::Identity(2, 2));
    EXPECT_THROW(evolve(h, StateVector::basis(3, 0), 0, 1), Error);
    EXPECT_THROW(evolve(h, StateVector::basis(2, 0), 1, 0), Error);
    StateVector bad = StateVector::basis(2, 0);
    bad.amplitudes(1) = 1.0;
    EXPECT_THROW(evolve(h, bad, 0, 1), Error);
}

TEST(Eigensystem, TwoLevelClosedForm) {
    // mu+ + mu- = Delta, mu+ - mu- = sqrt(Delta^2 + Omega^2).
    for (auto [rabi, det] : {std::pair{0.3, 1.2}, {2.0, -0.5}, {1e-3, 4.0}, {5.0, 0.0}}) {
        CMatrix h = CMatrix::Zero(2, 2);
        h(0, 1) = h(1, 0) = 0.5 * rabi;
        h(1, 1) = det;
        const auto es = instantaneous_eigensystem(h);
        EXPECT_NEAR(es.values(0) + es.values(1), det, 1e-10);
        EXPECT_NEAR(es.values(1) - es.values(0), std::sqrt(det * det + rabi * rabi), 1e-10);
    }
}

TEST(Eigensystem, GaugeIsContinuous) {
    const auto h = two_level(2.0, 3.0, -1.0);
    std::optional<Eigensystem> prev;
    for (double t = -10; t <= 10; t += 0.05) {
        const auto es = instantaneous_eigensystem(h(t), prev ? &*prev : nullptr);
        if (prev) {
            for (int k = 0; k < 2; ++k) {
                const Complex overlap = prev->vectors.col(k).dot(es.vectors.col(k));
                EXPECT_GT(overlap.real(), 0.9);
                EXPECT_NEAR(overlap.imag(), 0.0, 1e-12);
            }
        }
        prev = es;
    }
}

TEST(Eigensystem, FlagsDegeneracy) {
    const auto es = instantaneous_eigensystem(CMatrix::Identity(3, 3));
    EXPECT_TRUE(es.degenerate);
}

TEST(Steppers, IntegratorOrder) {
    // Rotating drive with a Rabi closed form for P1(T). The error shrinks
    // >= 4x per halving for the midpoint rule and ~16x for fourth-order Magnus.
    const double rabi = 1.0, drive = 5.0, splitting = 5.6, duration = 10.0;
    const TimeDependentHamiltonian h{2,
                                     [=](double t) {
                                         CMatrix m = CMatrix::Zero(2, 2);
                                         m(0, 0) = -0.5 * splitting;
                                         m(1, 1) = 0.5 * splitting;
                                         m(0, 1) = 0.5 * rabi * std::exp(Complex(0.0, drive * t));
                                         m(1, 0) = std::conj(m(0, 1));
                                         return m;
                                     },
                                     Frame::ReducedSchrodinger,
                                     {"0", "1"}};
    const double gen = std::hypot(rabi, splitting - drive);
    const double exact = std::pow(rabi / gen * std::sin(0.5 * gen * duration), 2);
    for (auto [stepper, factor] : {std::pair{Stepper::Midpoint, 4.0}, {Stepper::Magnus4, 15.9}}) {
        std::vector<double> err;
        for (double dt : {0.1, 0.05, 0.025}) {
            EvolveOptions o;
            o.dt = dt;
            o.stepper = stepper;
            o.track_adiabatic = false;
            o.norm_budget = 1e-6;
            err.push_back(std::abs(evolve(h, StateVector::basis(2, 0), 0.0, duration, o).final_population(1) - exact));
        }
        EXPECT_GE(err[0] / err[1], factor);
        EXPECT_GE(err[1] / err[2], factor);
    }
}

TEST(Hermiticity, SampledGeneratorIsHermitian) {
    const auto h = two_level(2.0, 3.0, -1.0);
    std::vector<double> ts;
    for (int k = 0; k <= 200; ++k) ts.push_back(-10 + 0.1 * k);
    EXPECT_LE(hermiticity_error(h, ts), 1e-12);
}

TEST(FrameShift, ReducedFrameReproducesInteractionPopulations) {
    // Two levels with a coupling oscillating at -w: offsets (0, w).
    const double w = 3.0;
    const auto pump = PulseShape::gaussian(1.0, 0.0, 2.0);
    Eigen::MatrixXd freq(2, 2);
    freq << 0.0, -w, w, 0.0;
    InteractionHamiltonian hi{2,
                              [pump](double t) {
                                  CMatrix c = CMatrix::Zero(2, 2);
                                  c(0, 1) = c(1, 0) = 0.5 * evaluate(pump, t);
                                  return c;
                              },
                              freq,
                              {"0", "1"}};
    const auto hr = frame_shift(hi, {0.0, w});
    EvolveOptions o;
    o.dt = 0.002;
    o.stepper = Stepper::Magnus4;
    o.track_adiabatic = false;
    const auto a = evolve(hi.as_hamiltonian(), StateVector::basis(2, 0), -8, 8, o);
    const auto b = evolve(hr, StateVector::basis(2, 0), -8, 8, o);
    for (std::size_t k = 0; k < a.times.size(); k += 50) {
        EXPECT_NEAR(a.populations[k][1], b.populations[k][1], 1e-8);
    }
}

TEST(FrameShift, InconsistentOffsetsRejected) {
    Eigen::MatrixXd freq(2, 2);
    freq << 0.0, -3.0, 3.0, 0.0;
    InteractionHamiltonian hi{2, [](double) { return CMatrix::Zero(2, 2).eval(); }, freq, {}};
    try {
        frame_shift(hi, {0.0, 2.0});
        FAIL() << "expected FrameMismatch";
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::FrameMismatch);
    }
}

TEST(Propagator, UnitaryAndConsistentWithEvolve) {
    const auto h = two_level(2.0, 3.0, -1.0);
    const CMatrix u = propagator(h, -10, 10);
    EXPECT_LT((u.adjoint() * u - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
    const auto traj = evolve(h, StateVector::basis(2, 1), -10, 10);
    EXPECT_LT((u.col(1) - traj.final_state()).norm(), 1e-12);
}

TEST(TrajectoryCsv, HeaderAndRows) {
    EvolveOptions o;
    o.dt = 0.5;
    const auto traj = evolve(two_level(1.0, 1.0, 0.0), StateVector::basis(2, 0), 0, 2, o);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    const std::string s = os.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "t_ns,P_0,P_1,A_0,A_1,mu_0,mu_1,norm");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 1 + 5);
}
