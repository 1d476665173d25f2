#pragma once

// Lowest eigenpairs of a real symmetric tridiagonal matrix by Sturm-sequence
// bisection followed by inverse iteration. Intended for finite-difference
// Hamiltonians with a few thousand points where only a handful of bound
// states are wanted.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "scrap/errors.hpp"

namespace scrap {

struct TridiagonalEigenpairs {
    std::vector<double> values;                // ascending
    std::vector<std::vector<double>> vectors;  // unit Euclidean norm
};

namespace detail {

// Number of eigenvalues strictly below x (Sturm count via LDL^T pivots).
inline std::size_t sturm_count(std::span<const double> diag, std::span<const double> off, double x) {
    const double tiny = std::numeric_limits<double>::min() * 1e3;
    std::size_t count = 0;
    double q = diag[0] - x;
    if (q < 0) ++count;
    for (std::size_t i = 1; i < diag.size(); ++i) {
        if (std::abs(q) < tiny) q = -tiny;
        q = diag[i] - x - off[i - 1] * off[i - 1] / q;
        if (q < 0) ++count;
    }
    return count;
}

// Solves (T - shift) x = rhs with partial pivoting; rhs is overwritten by x.
inline void shifted_solve(std::span<const double> diag, std::span<const double> off, double shift,
                          std::vector<double>& rhs) {
    const std::size_t n = diag.size();
    // Row i of the eliminated system holds u0[i] x_i + u1[i] x_{i+1} + u2[i] x_{i+2}.
    std::vector<double> u0(n), u1(n, 0.0), u2(n, 0.0);
    double a = diag[0] - shift;                  // current pivot-row diagonal
    double b = n > 1 ? off[0] : 0.0;             // current pivot-row superdiagonal
    double c = 0.0;                              // current pivot-row second superdiagonal
    const double eps = std::numeric_limits<double>::epsilon();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double sub = off[i];
        const double next_diag = diag[i + 1] - shift;
        const double next_sup = i + 2 < n ? off[i + 1] : 0.0;
        if (std::abs(sub) > std::abs(a)) {
            // Swap rows i and i+1.
            u0[i] = sub;
            u1[i] = next_diag;
            u2[i] = next_sup;
            const double m = a / sub;
            std::swap(rhs[i], rhs[i + 1]);
            rhs[i + 1] -= m * rhs[i];
            a = b - m * next_diag;
            b = c - m * next_sup;
            c = 0.0;
        } else {
            if (a == 0.0) a = eps;
            u0[i] = a;
            u1[i] = b;
            u2[i] = c;
            const double m = sub / a;
            rhs[i + 1] -= m * rhs[i];
            a = next_diag - m * b;
            b = next_sup - m * c;
            c = 0.0;
        }
    }
    if (a == 0.0) a = eps;
    u0[n - 1] = a;
    for (std::size_t k = n; k-- > 0;) {
        double s = rhs[k];
        if (k + 1 < n) s -= u1[k] * rhs[k + 1];
        if (k + 2 < n) s -= u2[k] * rhs[k + 2];
        rhs[k] = s / u0[k];
    }
}

}  // namespace detail

/// Lowest `count` eigenpairs of the symmetric tridiagonal matrix with main
/// diagonal `diag` (size n) and off-diagonal `off` (size n-1).
inline TridiagonalEigenpairs lowest_eigenpairs(std::span<const double> diag, std::span<const double> off,
                                               std::size_t count) {
    const std::size_t n = diag.size();
    if (n == 0 || off.size() + 1 != n) {
        throw Error(ErrorKind::InvalidArgument, "tridiagonal: inconsistent diagonal sizes");
    }
    count = std::min(count, n);

    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (i > 0 ? std::abs(off[i - 1]) : 0.0) + (i + 1 < n ? std::abs(off[i]) : 0.0);
        lo = std::min(lo, diag[i] - r);
        hi = std::max(hi, diag[i] + r);
    }
    const double scale = std::max(std::abs(lo), std::abs(hi));

    TridiagonalEigenpairs out;
    out.values.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        // Bisect for the smallest x with sturm_count(x) > k.
        double a = lo, b = hi;
        for (int it = 0; it < 200 && b - a > 4 * std::numeric_limits<double>::epsilon() * scale; ++it) {
            const double mid = 0.5 * (a + b);
            if (detail::sturm_count(diag, off, mid) > k) {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.values.push_back(0.5 * (a + b));
    }

    out.vectors.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        const double lambda = out.values[k];
        const double shift = lambda + 1e-10 * std::max(1.0, std::abs(lambda));
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = 1.0 + 0.01 * std::sin(0.37 * static_cast<double>(i) + static_cast<double>(k));
        }
        for (int it = 0; it < 4; ++it) {
            detail::shifted_solve(diag, off, shift, v);
            for (const auto& prev : out.vectors) {
                double dot = 0.0;
                for (std::size_t i = 0; i < n; ++i) dot += prev[i] * v[i];
                for (std::size_t i = 0; i < n; ++i) v[i] -= dot * prev[i];
            }
            double norm = 0.0;
            for (double x : v) norm += x * x;
            norm = std::sqrt(norm);
            for (double& x : v) x /= norm;
        }
        out.vectors.push_back(std::move(v));
    }
    return out;
}

}  // namespace scrap
