#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/matrix.hpp"

namespace fsvd {

// Relative tolerance used by every rank decision in the library.
inline constexpr double kRankTolerance = 1e-12;

struct GramSchmidtResult {
    Matrix q;                   // columns orthonormal
    std::vector<double> norms;  // squared norm of each orthogonalized column
                                // before the final scaling
};

// Classical Gram-Schmidt with deferred scaling. Residual coefficients for
// column i are all computed against the original column i, and every column
// is divided by its norm only at the end. This exact operation order is
// load-bearing: the federated variant reproduces it from per-site partial
// sums, and the two must agree to the last few bits.
//
// Throws RankDeficient(i) when the orthogonalized column i has squared norm
// <= kRankTolerance times the largest input column squared norm.
inline GramSchmidtResult gram_schmidt(const Matrix& v) {
    const std::size_t rows = v.rows();
    const std::size_t k = v.cols();
    Matrix u = v;
    std::vector<double> norms(k, 0.0);

    double max_input_sq = 0.0;
    for (std::size_t j = 0; j < k; ++j)
        max_input_sq = std::max(max_input_sq, column_dot(v, j, v, j));
    const double tol = kRankTolerance * max_input_sq;

    for (std::size_t i = 0; i < k; ++i) {
        if (i > 0) {
            std::vector<double> r(i);
            for (std::size_t j = 0; j < i; ++j)
                r[j] = column_dot(u, j, v, i) / norms[j];
            for (std::size_t row = 0; row < rows; ++row) {
                double acc = v(row, i);
                for (std::size_t j = 0; j < i; ++j) acc -= r[j] * u(row, j);
                u(row, i) = acc;
            }
        }
        norms[i] = column_dot(u, i, u, i);
        if (norms[i] <= tol)
            throw RankDeficient(i, "column " + std::to_string(i) +
                                       " is linearly dependent on earlier columns");
    }

    for (std::size_t i = 0; i < k; ++i) {
        const double inv = 1.0 / std::sqrt(norms[i]);
        for (std::size_t row = 0; row < rows; ++row) u(row, i) *= inv;
    }
    return {std::move(u), std::move(norms)};
}

// Convenience when only the orthonormal factor is needed.
inline Matrix orthonormalize(const Matrix& v) { return gram_schmidt(v).q; }

}  // namespace fsvd
