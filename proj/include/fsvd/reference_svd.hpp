#pragma once

#include <cmath>
#include <string>

#include "fsvd/errors.hpp"
#include "fsvd/jacobi.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/svd_result.hpp"

namespace fsvd {

namespace detail {

inline SvdResult reference_svd_impl(const Matrix& a, std::size_t k, bool allow_fewer) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (k == 0 || k > std::min(m, n))
        throw DimensionMismatch("reference_svd: k out of range");

    const bool gram_right = n <= m;  // eigendecompose a^T a when it is smaller
    const Matrix gram = gram_right ? multiply_at_b(a, a) : multiply_a_bt(a, a);
    const SymmetricEigen eig = jacobi_eigen(gram);

    const double sigma_max = std::sqrt(std::max(eig.values[0], 0.0));
    SvdResult out;
    out.sigma.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double s = std::sqrt(std::max(eig.values[i], 0.0));
        if (s <= kRankTolerance * sigma_max) {
            if (allow_fewer && i > 0) break;
            throw RankDeficient(i, "input has only " + std::to_string(i) +
                                       " singular values above tolerance, need " +
                                       std::to_string(k));
        }
        out.sigma.push_back(s);
    }
    k = out.sigma.size();

    const Matrix basis = eig.vectors.col_slice(0, k);
    if (gram_right) {
        out.g = basis;
        out.h = multiply(a, basis);   // column i has norm sigma_i
        for (std::size_t j = 0; j < k; ++j) {
            const double inv = 1.0 / column_norm(out.h, j);
            for (std::size_t i = 0; i < m; ++i) out.h(i, j) *= inv;
        }
    } else {
        out.h = basis;
        out.g = multiply_at_b(a, basis);
        for (std::size_t j = 0; j < k; ++j) {
            const double inv = 1.0 / column_norm(out.g, j);
            for (std::size_t i = 0; i < n; ++i) out.g(i, j) *= inv;
        }
    }

    sign_normalize(out);
    out.converged = true;
    return out;
}

}  // namespace detail

// Brute-force truncated SVD used as the ground truth everywhere: builds the
// smaller of the two Gram matrices, eigendecomposes it with the Jacobi
// solver, and lifts the missing factor through one multiplication with `a`.
// Shares no code with the iterative solvers, which is the point.
//
// Throws RankDeficient when fewer than k singular values exceed
// kRankTolerance * sigma_max; the error's column field holds the number of
// usable singular values.
inline SvdResult reference_svd(const Matrix& a, std::size_t k) {
    return detail::reference_svd_impl(a, k, false);
}

// Rank-tolerant variant: stops at the numerical rank instead of throwing,
// so the result carries min(k, rank) pairs. A numerically zero input still
// throws RankDeficient(0).
inline SvdResult reference_svd_up_to(const Matrix& a, std::size_t k) {
    return detail::reference_svd_impl(a, k, true);
}

}  // namespace fsvd
