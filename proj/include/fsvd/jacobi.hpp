#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/matrix.hpp"

namespace fsvd {

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column i pairs with values[i]
};

namespace detail {

inline double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = i + 1; j < a.cols(); ++j) s += 2.0 * a(i, j) * a(i, j);
    return std::sqrt(s);
}

}  // namespace detail

// Cyclic Jacobi eigensolver for symmetric matrices. Sweeps row by row and
// annihilates each off-diagonal entry with a two-sided rotation until the
// off-diagonal mass drops below 1e-14 of the Frobenius norm. Slow compared
// to tridiagonalization-based solvers but simple, unconditionally accurate,
// and entirely independent of the iterative code paths it serves as an
// oracle for.
//
// Pre: `a` square and symmetric. Eigenpairs are returned sorted by value,
// largest first, with a stable order on ties.
inline SymmetricEigen jacobi_eigen(Matrix a, std::size_t max_sweeps = 64) {
    if (a.rows() != a.cols())
        throw DimensionMismatch("jacobi_eigen: matrix is not square");
    const std::size_t n = a.rows();
    Matrix v = Matrix::identity(n);

    const double stop = 1e-14 * std::max(frobenius_norm(a), 1e-300);
    std::size_t sweep = 0;
    while (detail::off_diagonal_norm(a) > stop) {
        if (++sweep > max_sweeps)
            throw NumericallySingular("jacobi_eigen: no convergence after max sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0)
                                     ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                     : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                const double app = a(p, p), aqq = a(q, q);
                a(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
                a(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (i == p || i == q) continue;
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(p, i) = a(i, p);
                    a(i, q) = s * aip + c * aiq;
                    a(q, i) = a(i, q);
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = v(i, p), viq = v(i, q);
                    v(i, p) = c * vip - s * viq;
                    v(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

}  // namespace fsvd
