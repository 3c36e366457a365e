#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/matrix.hpp"

namespace fsvd {

// Truncated SVD factors: a ~ h * diag(sigma) * g^T with orthonormal columns
// in h (m x k) and g (n x k), sigma non-increasing and non-negative once a
// run has converged.
struct SvdResult {
    Matrix h;
    Matrix g;
    std::vector<double> sigma;
    bool converged = true;
    std::size_t iterations = 0;
};

// Index of the entry that decides a column's sign: largest magnitude wins,
// ties go to the lowest row index.
inline std::size_t dominant_row(const Matrix& m, std::size_t col) {
    std::size_t best = 0;
    double best_abs = std::abs(m(0, col));
    for (std::size_t i = 1; i < m.rows(); ++i) {
        const double a = std::abs(m(i, col));
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

inline void flip_column(Matrix& m, std::size_t col) {
    for (std::size_t i = 0; i < m.rows(); ++i) m(i, col) = -m(i, col);
}

// Deterministic resolution of the per-column sign ambiguity: each column of
// `h` is flipped so its dominant entry is positive, and the matching column
// of `g` is flipped with it so h_i^T A g_i keeps its value.
inline void sign_normalize_pair(Matrix& h, Matrix& g) {
    if (h.cols() != g.cols())
        throw DimensionMismatch("sign_normalize_pair: column counts differ");
    for (std::size_t j = 0; j < h.cols(); ++j) {
        if (h(dominant_row(h, j), j) < 0.0) {
            flip_column(h, j);
            flip_column(g, j);
        }
    }
}

// Same convention for a matrix on its own.
inline void sign_normalize_columns(Matrix& m) {
    for (std::size_t j = 0; j < m.cols(); ++j)
        if (m(dominant_row(m, j), j) < 0.0) flip_column(m, j);
}

inline void sign_normalize(SvdResult& r) { sign_normalize_pair(r.h, r.g); }

}  // namespace fsvd
