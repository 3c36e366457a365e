#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/gram_schmidt.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/rng.hpp"
#include "fsvd/svd_result.hpp"

namespace fsvd {

struct ConvergenceCriterion {
    double epsilon = 1e-9;
    std::size_t max_iterations = 500;
};

// True when every pair of same-index columns is collinear up to epsilon:
// |h_prev_i . h_curr_i| >= 1 - epsilon. Both inputs must have unit-norm
// columns. The absolute value makes the test immune to sign flips between
// consecutive iterates.
inline bool converged(const Matrix& h_prev, const Matrix& h_curr, double epsilon) {
    if (!h_prev.same_shape(h_curr))
        throw DimensionMismatch("converged: shapes differ");
    for (std::size_t j = 0; j < h_curr.cols(); ++j)
        if (std::abs(column_dot(h_prev, j, h_curr, j)) < 1.0 - epsilon) return false;
    return true;
}

// Optional per-iteration capture, used by equivalence tests and by the
// experiment harness for angle tables.
struct IterationTrace {
    std::vector<Matrix> h;
    std::vector<Matrix> g;
};

// Centralized vertical subspace iteration for the top-k SVD of a (m x n):
//
//   G_0 = orthonormalize(gaussian n x k)
//   repeat: H_i = orthonormalize(A G_{i-1}); G_i = orthonormalize(A^T H_i)
//
// stopping once consecutive H iterates are collinear within crit.epsilon or
// crit.max_iterations is reached (result flagged, not thrown). The gaussian
// init consumes the seed's stream in row-major order over the full n x k
// matrix; the federated driver slices the identical stream by site offset,
// which is what makes the two trajectories comparable.
inline SvdResult vertical_subspace_iteration(const Matrix& a, std::size_t k,
                                             const ConvergenceCriterion& crit,
                                             std::uint64_t seed,
                                             IterationTrace* trace = nullptr) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    if (k == 0 || k > std::min(m, n))
        throw DimensionMismatch("vertical_subspace_iteration: k out of range");
    if (crit.max_iterations == 0)
        throw DimensionMismatch("vertical_subspace_iteration: max_iterations must be positive");

    Matrix g = orthonormalize(gaussian_matrix(n, k, seed));
    Matrix h;
    Matrix h_prev;
    bool done = false;
    std::size_t iterations = 0;

    for (std::size_t i = 1; i <= crit.max_iterations; ++i) {
        h = orthonormalize(multiply(a, g));
        done = i >= 2 && converged(h_prev, h, crit.epsilon);
        g = orthonormalize(multiply_at_b(a, h));
        if (trace) {
            trace->h.push_back(h);
            trace->g.push_back(g);
        }
        h_prev = h;
        iterations = i;
        if (done) break;
    }

    SvdResult out;
    out.h = std::move(h);
    out.g = std::move(g);
    out.converged = done;
    out.iterations = iterations;
    out.sigma.resize(k);
    const Matrix ag = multiply(a, out.g);
    for (std::size_t j = 0; j < k; ++j) out.sigma[j] = column_dot(out.h, j, ag, j);
    sign_normalize(out);
    return out;
}

}  // namespace fsvd
