#pragma once

// Finite-dimensional time-dependent Schroedinger propagation (hbar = 1, time in
// ns, energies in rad/ns), instantaneous eigensystems with continuous gauge,
// adiabatic-population bookkeeping and frame changes.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "scrap/errors.hpp"

namespace scrap {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

enum class Frame { Lab, Interaction, ReducedSchrodinger };

inline std::string_view to_string(Frame f) {
    switch (f) {
        case Frame::Lab: return "lab";
        case Frame::Interaction: return "interaction";
        case Frame::ReducedSchrodinger: return "reduced-schrodinger";
    }
    return "lab";
}

struct TimeDependentHamiltonian {
    std::size_t dimension = 0;
    std::function<CMatrix(double)> generator;
    Frame frame = Frame::ReducedSchrodinger;
    std::vector<std::string> labels;

    CMatrix operator()(double t) const { return generator(t); }
};

inline TimeDependentHamiltonian constant_hamiltonian(const CMatrix& h, std::vector<std::string> labels = {}) {
    return {static_cast<std::size_t>(h.rows()), [h](double) { return h; }, Frame::ReducedSchrodinger,
            std::move(labels)};
}

/// Largest |H_ij - conj(H_ji)| over the sampled times.
inline double hermiticity_error(const TimeDependentHamiltonian& h, const std::vector<double>& times) {
    double worst = 0.0;
    for (double t : times) {
        const CMatrix m = h(t);
        worst = std::max(worst, (m - m.adjoint()).cwiseAbs().maxCoeff());
    }
    return worst;
}

struct StateVector {
    CVector amplitudes;
    std::vector<std::string> labels;

    static StateVector basis(std::size_t dimension, std::size_t index) {
        StateVector s;
        s.amplitudes = CVector::Zero(static_cast<Eigen::Index>(dimension));
        s.amplitudes(static_cast<Eigen::Index>(index)) = 1.0;
        return s;
    }
    static StateVector from(CVector amplitudes) { return {std::move(amplitudes), {}}; }

    double norm() const { return amplitudes.norm(); }
    std::size_t size() const { return static_cast<std::size_t>(amplitudes.size()); }
};

/// Exact exp(-i K) for Hermitian K.
inline CMatrix unitary_exponential(const CMatrix& k) {
    if (k.rows() == 1) {
        CMatrix u(1, 1);
        u(0, 0) = std::exp(Complex(0.0, -k(0, 0).real()));
        return u;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
    const CVector phases = (-Complex(0.0, 1.0) * es.eigenvalues().cast<Complex>()).array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

enum class Stepper {
    Midpoint,  // exp(-i H(t + h/2) h), second order
    Magnus4,   // two-point Gauss-Legendre Magnus expansion, fourth order
};

/// One-step propagator over [t, t + h].
inline CMatrix step_propagator(const TimeDependentHamiltonian& h, double t, double dt, Stepper stepper) {
    if (stepper == Stepper::Midpoint) return unitary_exponential(h(t + 0.5 * dt) * dt);
    const double offset = std::sqrt(3.0) / 6.0;
    const CMatrix h1 = h(t + (0.5 - offset) * dt);
    const CMatrix h2 = h(t + (0.5 + offset) * dt);
    const CMatrix commutator = h2 * h1 - h1 * h2;
    const CMatrix k = 0.5 * dt * (h1 + h2) - Complex(0.0, std::sqrt(3.0) / 12.0 * dt * dt) * commutator;
    return unitary_exponential(0.5 * (k + k.adjoint()));
}

/// Instantaneous eigenvalues (ascending) and eigenvectors (columns) with a
/// continuous gauge.
struct Eigensystem {
    Eigen::VectorXd values;
    CMatrix vectors;
    double min_gap = std::numeric_limits<double>::infinity();
    bool degenerate = false;  // min gap below 1e-6 rad/ns; continuity unreliable
};

inline constexpr double degeneracy_threshold = 1e-6;

/// Gauge: each vector's overlap with the previous frame's vector of the same
/// index is made real and positive; without a previous frame the
/// largest-magnitude component is made real and positive.
inline Eigensystem instantaneous_eigensystem(const CMatrix& h, const Eigensystem* previous = nullptr) {
    Eigensystem out;
    const auto n = h.rows();
    if (n == 1) {
        out.values = Eigen::VectorXd::Constant(1, h(0, 0).real());
        out.vectors = CMatrix::Identity(1, 1);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    out.values = es.eigenvalues();
    out.vectors = es.eigenvectors();
    for (Eigen::Index k = 0; k + 1 < n; ++k) out.min_gap = std::min(out.min_gap, out.values(k + 1) - out.values(k));
    out.degenerate = out.min_gap < degeneracy_threshold;
    for (Eigen::Index k = 0; k < n; ++k) {
        Complex ref;
        if (previous != nullptr && previous->vectors.rows() == n) {
            ref = previous->vectors.col(k).dot(out.vectors.col(k));  // <prev|v>
        } else {
            Eigen::Index arg = 0;
            out.vectors.col(k).cwiseAbs().maxCoeff(&arg);
            ref = out.vectors(arg, k);
        }
        if (std::abs(ref) > 0.0) out.vectors.col(k) *= std::conj(ref) / std::abs(ref);
    }
    return out;
}

struct EvolveOptions {
    double dt = 0.001;  // ns
    Stepper stepper = Stepper::Midpoint;
    double norm_budget = 1e-9;
    int max_halvings = 6;
    std::size_t record_every = 1;
    bool track_adiabatic = true;
};

struct TrajectoryResult {
    std::vector<double> times;
    std::vector<CVector> states;
    std::vector<std::vector<double>> populations;           // diabatic P_i(t)
    std::vector<std::vector<double>> adiabatic_populations;  // |<lambda_k(t)|psi(t)>|^2
    std::vector<std::vector<double>> eigenvalues;            // mu_k(t)
    std::vector<double> norms;
    std::vector<std::string> labels;
    double max_norm_drift = 0.0;
    bool degeneracy_warning = false;

    const CVector& final_state() const { return states.back(); }
    double final_population(std::size_t i) const { return populations.back().at(i); }
    double max_population(std::size_t i) const {
        double m = 0.0;
        for (const auto& p : populations) m = std::max(m, p.at(i));
        return m;
    }
    double min_population(std::size_t i) const {
        double m = 1.0;
        for (const auto& p : populations) m = std::min(m, p.at(i));
        return m;
    }
};

namespace detail {

inline std::vector<double> abs2(const CVector& v) {
    std::vector<double> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i) out[static_cast<std::size_t>(i)] = std::norm(v(i));
    return out;
}

inline void record(TrajectoryResult& r, const TimeDependentHamiltonian& h, double t, const CVector& psi,
                   bool track_adiabatic, std::optional<Eigensystem>& frame) {
    r.times.push_back(t);
    r.states.push_back(psi);
    r.populations.push_back(abs2(psi));
    r.norms.push_back(psi.norm());
    if (track_adiabatic) {
        frame = instantaneous_eigensystem(h(t), frame ? &*frame : nullptr);
        r.degeneracy_warning = r.degeneracy_warning || frame->degenerate;
        r.adiabatic_populations.push_back(abs2(frame->vectors.adjoint() * psi));
        r.eigenvalues.emplace_back(frame->values.data(), frame->values.data() + frame->values.size());
    }
}

}  // namespace detail

/// Propagates i dpsi/dt = H(t) psi from t0 to tf on a uniform grid with step
/// close to options.dt. Every step is an exact unitary; a step whose norm
/// change exceeds its share of the budget is retried with halved sub-steps.
inline TrajectoryResult evolve(const TimeDependentHamiltonian& h, const StateVector& psi0, double t0, double tf,
                               const EvolveOptions& options = {}) {
    if (!(options.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "evolve: dt must be positive");
    if (!(tf > t0)) throw Error(ErrorKind::InvalidArgument, "evolve: tf must exceed t0");
    if (psi0.size() != h.dimension) throw Error(ErrorKind::InvalidArgument, "evolve: state/Hamiltonian size mismatch");
    if (std::abs(psi0.norm() - 1.0) > 1e-9) throw Error(ErrorKind::InvalidArgument, "evolve: initial state not normalized");

    const auto steps = static_cast<std::size_t>(std::max<long long>(1, std::llround((tf - t0) / options.dt)));
    const double dt = (tf - t0) / static_cast<double>(steps);
    const double step_budget = options.norm_budget / static_cast<double>(steps);
    const std::size_t stride = std::max<std::size_t>(1, options.record_every);

    TrajectoryResult r;
    r.labels = h.labels;
    std::optional<Eigensystem> frame;
    CVector psi = psi0.amplitudes;
    const double norm0 = psi.norm();
    detail::record(r, h, t0, psi, options.track_adiabatic, frame);

    for (std::size_t s = 0; s < steps; ++s) {
        const double t = t0 + dt * static_cast<double>(s);
        CVector next = step_propagator(h, t, dt, options.stepper) * psi;
        int halvings = 0;
        while (std::abs(next.norm() - psi.norm()) > step_budget + 4.0 * std::numeric_limits<double>::epsilon()) {
            if (++halvings > options.max_halvings) {
                throw Error(ErrorKind::StepFailure, "norm drift budget exceeded at t = " + std::to_string(t));
            }
            const std::size_t sub = std::size_t{1} << halvings;
            const double h_sub = dt / static_cast<double>(sub);
            next = psi;
            for (std::size_t k = 0; k < sub; ++k) {
                next = step_propagator(h, t + h_sub * static_cast<double>(k), h_sub, options.stepper) * next;
            }
        }
        psi = std::move(next);
        r.max_norm_drift = std::max(r.max_norm_drift, std::abs(psi.norm() - norm0));
        if ((s + 1) % stride == 0 || s + 1 == steps) {
            detail::record(r, h, t + dt, psi, options.track_adiabatic, frame);
        }
    }
    if (r.max_norm_drift > options.norm_budget) {
        throw Error(ErrorKind::StepFailure, "accumulated norm drift " + std::to_string(r.max_norm_drift));
    }
    return r;
}

/// Full propagator U(tf, t0) built column by column.
inline CMatrix propagator(const TimeDependentHamiltonian& h, double t0, double tf, EvolveOptions options = {}) {
    options.track_adiabatic = false;
    options.record_every = std::numeric_limits<std::size_t>::max();
    CMatrix u(h.dimension, h.dimension);
    for (std::size_t k = 0; k < h.dimension; ++k) {
        u.col(static_cast<Eigen::Index>(k)) = evolve(h, StateVector::basis(h.dimension, k), t0, tf, options).final_state();
    }
    return u;
}

/// Probability of the excited state after a resonant pulse of area A.
inline double pi_pulse_analytic(double area) { return 0.5 * (1.0 - std::cos(area)); }

/// Projects each recorded state onto the gauge-tracked instantaneous eigenbasis.
inline std::vector<std::vector<double>> adiabatic_populations(const TrajectoryResult& trajectory,
                                                              const TimeDependentHamiltonian& h,
                                                              bool* degeneracy_warning = nullptr) {
    std::vector<std::vector<double>> out;
    out.reserve(trajectory.times.size());
    std::optional<Eigensystem> frame;
    bool warned = false;
    for (std::size_t k = 0; k < trajectory.times.size(); ++k) {
        frame = instantaneous_eigensystem(h(trajectory.times[k]), frame ? &*frame : nullptr);
        warned = warned || frame->degenerate;
        out.push_back(detail::abs2(frame->vectors.adjoint() * trajectory.states[k]));
    }
    if (degeneracy_warning != nullptr) *degeneracy_warning = warned;
    return out;
}

/// Interaction-picture Hamiltonian with entries C_jk(t) exp(i W_jk t). A NaN in
/// `frequencies` marks an entry that is identically zero.
struct InteractionHamiltonian {
    std::size_t dimension = 0;
    std::function<CMatrix(double)> coefficients;
    Eigen::MatrixXd frequencies;
    std::vector<std::string> labels;

    CMatrix operator()(double t) const {
        CMatrix m = coefficients(t);
        for (Eigen::Index j = 0; j < m.rows(); ++j) {
            for (Eigen::Index k = 0; k < m.cols(); ++k) {
                const double w = frequencies(j, k);
                if (std::isnan(w)) {
                    m(j, k) = 0.0;
                } else if (w != 0.0) {
                    m(j, k) *= std::exp(Complex(0.0, w * t));
                }
            }
        }
        return m;
    }

    TimeDependentHamiltonian as_hamiltonian() const {
        InteractionHamiltonian self = *this;
        return {dimension, [self](double t) { return self(t); }, Frame::Interaction, labels};
    }
};

/// Moves to the frame psi_int = diag(exp(i f_k t)) psi_red. The result is
/// C(t) + diag(f). Every coupled entry must oscillate at exactly f_j - f_k.
inline TimeDependentHamiltonian frame_shift(const InteractionHamiltonian& h, const std::vector<double>& offsets,
                                            double tolerance = 1e-9) {
    if (offsets.size() != h.dimension) throw Error(ErrorKind::FrameMismatch, "offset count does not match dimension");
    for (std::size_t j = 0; j < h.dimension; ++j) {
        for (std::size_t k = 0; k < h.dimension; ++k) {
            const double w = h.frequencies(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
            if (std::isnan(w)) continue;
            const double expected = j == k ? 0.0 : offsets[j] - offsets[k];
            if (std::abs(w - expected) > tolerance) {
                throw Error(ErrorKind::FrameMismatch, "entry (" + std::to_string(j) + "," + std::to_string(k) +
                                                          ") oscillates at " + std::to_string(w) +
                                                          " rad/ns with no matching offset");
            }
        }
    }
    auto coefficients = h.coefficients;
    Eigen::VectorXd diag(static_cast<Eigen::Index>(offsets.size()));
    for (std::size_t k = 0; k < offsets.size(); ++k) diag(static_cast<Eigen::Index>(k)) = offsets[k];
    const Eigen::MatrixXd mask = h.frequencies;
    return {h.dimension,
            [coefficients, diag, mask](double t) {
                CMatrix m = coefficients(t);
                for (Eigen::Index j = 0; j < m.rows(); ++j) {
                    for (Eigen::Index k = 0; k < m.cols(); ++k) {
                        if (std::isnan(mask(j, k))) m(j, k) = 0.0;
                    }
                }
                m.diagonal() += diag.cast<Complex>();
                return m;
            },
            Frame::ReducedSchrodinger, h.labels};
}

/// CSV: t, P_i..., A_k..., mu_k..., norm. 12 significant digits.
inline void write_trajectory_csv(std::ostream& os, const TrajectoryResult& r) {
    const std::size_t n = r.populations.empty() ? 0 : r.populations.front().size();
    auto label = [&](std::size_t i) { return i < r.labels.size() ? r.labels[i] : std::to_string(i); };
    os << "t_ns";
    for (std::size_t i = 0; i < n; ++i) os << ",P_" << label(i);
    if (!r.adiabatic_populations.empty()) {
        for (std::size_t i = 0; i < n; ++i) os << ",A_" << i;
        for (std::size_t i = 0; i < n; ++i) os << ",mu_" << i;
    }
    os << ",norm\n";
    os << std::setprecision(12);
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        os << r.times[k];
        for (double p : r.populations[k]) os << "," << p;
        if (!r.adiabatic_populations.empty()) {
            for (double p : r.adiabatic_populations[k]) os << "," << p;
            for (double e : r.eigenvalues[k]) os << "," << e;
        }
        os << "," << r.norms[k] << "\n";
    }
}

}  // namespace scrap
