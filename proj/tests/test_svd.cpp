#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include <fsvd/metrics.hpp>
#include <fsvd/partition.hpp>
#include <fsvd/reference_svd.hpp>
#include <fsvd/rng.hpp>
#include <fsvd/subspace_iteration.hpp>
#include <fsvd/svd_result.hpp>

#include "helpers.hpp"
#include "oracles.hpp"

using fsvd::Matrix;

namespace {

Matrix diag_matrix(const std::vector<double>& d) {
    Matrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
    return m;
}

}  // namespace

// --- reference decomposition -------------------------------------------------

TEST_CASE("reference svd on identity and diagonal input") {
    const auto id = fsvd::reference_svd(Matrix::identity(4), 4);
    REQUIRE(id.sigma == std::vector<double>{1.0, 1.0, 1.0, 1.0});

    const auto di = fsvd::reference_svd(diag_matrix({3, 2, 1}), 3);
    REQUIRE(di.sigma.size() == 3);
    for (std::size_t i = 0; i < 3; ++i)
        REQUIRE(di.sigma[i] == Catch::Approx(3.0 - static_cast<double>(i)).epsilon(1e-12));
    // sign normalization makes the factors the positive identity
    REQUIRE(fsvd::max_abs_diff(di.h, Matrix::identity(3)) <= 1e-12);
    REQUIRE(fsvd::max_abs_diff(di.g, Matrix::identity(3)) <= 1e-12);
}

TEST_CASE("squared singular values match the independent eigenvalue oracle") {
    const Matrix a = fsvd::gaussian_matrix(6, 4, 7);
    const auto svd = fsvd::reference_svd(a, 4);
    const auto expected = oracle::symmetric_eigenvalues(fsvd::multiply_at_b(a, a));
    for (std::size_t i = 0; i < 4; ++i) {
        INFO("singular value " << i);
        REQUIRE(svd.sigma[i] * svd.sigma[i] == Catch::Approx(expected[i]).epsilon(1e-8));
    }
    for (std::size_t i = 1; i < 4; ++i) REQUIRE(svd.sigma[i - 1] >= svd.sigma[i]);
}

TEST_CASE("both gram-side choices describe the same decomposition") {
    const Matrix a = testutil::random_matrix(9, 6, 4);   // n < m: right gram
    const Matrix at = fsvd::transpose(a);                // n > m: left gram
    const auto svd = fsvd::reference_svd(a, 4);
    const auto svd_t = fsvd::reference_svd(at, 4);
    for (std::size_t i = 0; i < 4; ++i)
        REQUIRE(svd.sigma[i] == Catch::Approx(svd_t.sigma[i]).epsilon(1e-10));
    REQUIRE(testutil::max_angle(fsvd::principal_angles(svd.h, svd_t.g)) <= 1e-6);
    REQUIRE(testutil::max_angle(fsvd::principal_angles(svd.g, svd_t.h)) <= 1e-6);
    REQUIRE(testutil::orthonormality_error(svd.h) <= 1e-10);
    REQUIRE(testutil::orthonormality_error(svd.g) <= 1e-10);

    // factorization property: a ~ h diag(sigma) g^T
    Matrix approx(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double v = 0.0;
            for (std::size_t l = 0; l < 4; ++l) v += svd.h(i, l) * svd.sigma[l] * svd.g(j, l);
            approx(i, j) = v;
        }
    // top-4 of a rank-6 matrix: the residual is bounded by the trailing mass
    const auto full = fsvd::reference_svd(a, 6);
    const double tail = std::sqrt(full.sigma[4] * full.sigma[4] + full.sigma[5] * full.sigma[5]);
    REQUIRE(fsvd::frobenius_norm(fsvd::subtract(a, approx)) <= tail + 1e-9);
}

TEST_CASE("rank deficiency is reported with the usable count") {
    // zero rows and columns survive every Jacobi rotation unchanged, so the
    // trailing singular values are exact zeros rather than rounding noise
    Matrix a(8, 10);
    a(0, 0) = 4.0;
    a(1, 1) = 2.0;
    try {
        fsvd::reference_svd(a, 3);
        FAIL("expected RankDeficient");
    } catch (const fsvd::RankDeficient& e) {
        REQUIRE(e.column == 2);
    }
    const auto partial = fsvd::reference_svd_up_to(a, 3);
    REQUIRE(partial.sigma.size() == 2);
    REQUIRE(partial.sigma[0] == Catch::Approx(4.0).epsilon(1e-8));
    REQUIRE(partial.sigma[1] == Catch::Approx(2.0).epsilon(1e-8));
    REQUIRE(partial.h.cols() == 2);

    REQUIRE_THROWS_AS(fsvd::reference_svd_up_to(Matrix(4, 4), 2), fsvd::RankDeficient);
    REQUIRE_THROWS_AS(fsvd::reference_svd(a, 0), fsvd::DimensionMismatch);
    REQUIRE_THROWS_AS(fsvd::reference_svd(a, 9), fsvd::DimensionMismatch);
}

TEST_CASE("eigen residual of the retained pairs is small") {
    const Matrix a = testutil::random_matrix(9, 7, 21);
    const Matrix gram = fsvd::multiply_at_b(a, a);
    const auto svd = fsvd::reference_svd(a, 5);
    const double scale = fsvd::frobenius_norm(gram);
    for (std::size_t j = 0; j < 5; ++j) {
        double residual = 0.0;
        for (std::size_t i = 0; i < gram.rows(); ++i) {
            double gv = 0.0;
            for (std::size_t l = 0; l < gram.cols(); ++l) gv += gram(i, l) * svd.g(l, j);
            const double r = gv - svd.sigma[j] * svd.sigma[j] * svd.g(i, j);
            residual += r * r;
        }
        REQUIRE(std::sqrt(residual) <= 1e-9 * scale);
    }
}

// --- subspace iteration -------------------------------------------------------

TEST_CASE("diagonal matrix: top-2 pairs are the leading basis vectors") {
    const Matrix a = diag_matrix({3, 2, 1});
    fsvd::ConvergenceCriterion crit;
    crit.epsilon = 1e-13;  // successive-iterate test: error tracks sqrt(epsilon)
    const auto r = fsvd::vertical_subspace_iteration(a, 2, crit, 1);
    REQUIRE(r.converged);
    REQUIRE(r.sigma[0] == Catch::Approx(3.0).epsilon(1e-8));
    REQUIRE(r.sigma[1] == Catch::Approx(2.0).epsilon(1e-8));
    REQUIRE(fsvd::max_abs_diff(r.h, Matrix::identity(3).col_slice(0, 2)) <= 1e-5);
    REQUIRE(fsvd::max_abs_diff(r.g, Matrix::identity(3).col_slice(0, 2)) <= 1e-5);
}

TEST_CASE("seeded 20x15 case agrees with the reference decomposition") {
    const Matrix a = fsvd::gaussian_matrix(20, 15, 42);
    const auto it = fsvd::vertical_subspace_iteration(a, 5, {}, 3);
    const auto ref = fsvd::reference_svd(a, 5);
    REQUIRE(it.converged);
    for (std::size_t i = 0; i < 5; ++i) {
        INFO("sigma " << i);
        REQUIRE(it.sigma[i] == Catch::Approx(ref.sigma[i]).epsilon(1e-8));
    }
}

TEST_CASE("rank-one input recovers the product of the factor norms") {
    const std::vector<double> x{1.0, -2.0, 0.5, 3.0, 1.5, -0.25, 2.0};
    const std::vector<double> y{0.5, 1.0, -1.5, 2.5, 0.75};
    Matrix a(x.size(), y.size());
    double nx = 0.0, ny = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        nx += x[i] * x[i];
        for (std::size_t j = 0; j < y.size(); ++j) a(i, j) = x[i] * y[j];
    }
    for (double v : y) ny += v * v;
    const auto r = fsvd::vertical_subspace_iteration(a, 1, {}, 11);
    REQUIRE(r.sigma[0] == Catch::Approx(std::sqrt(nx) * std::sqrt(ny)).epsilon(1e-10));
}

TEST_CASE("converged runs satisfy the singular-pair residual bound") {
    const Matrix a = testutil::random_matrix(14, 11, 77);
    fsvd::ConvergenceCriterion crit;
    crit.epsilon = 1e-12;
    const auto r = fsvd::vertical_subspace_iteration(a, 3, crit, 5);
    REQUIRE(r.converged);
    const Matrix ag = fsvd::multiply(a, r.g);
    const double scale = fsvd::frobenius_norm(a);
    for (std::size_t j = 0; j < 3; ++j) {
        double residual = 0.0;
        for (std::size_t i = 0; i < a.rows(); ++i) {
            const double d = ag(i, j) - r.sigma[j] * r.h(i, j);
            residual += d * d;
        }
        // the stopping rule bounds successive iterates, so the per-pair
        // residual can only be trusted to roughly sqrt(epsilon) of the scale
        REQUIRE(std::sqrt(residual) <= 1e-5 * scale);
    }
}

TEST_CASE("iteration cap flags instead of throwing") {
    const Matrix a = testutil::random_matrix(10, 8, 3);
    fsvd::ConvergenceCriterion crit;
    crit.max_iterations = 1;
    const auto r = fsvd::vertical_subspace_iteration(a, 2, crit, 1);
    REQUIRE_FALSE(r.converged);
    REQUIRE(r.iterations == 1);
    REQUIRE(r.h.cols() == 2);

    crit.max_iterations = 0;
    REQUIRE_THROWS_AS(fsvd::vertical_subspace_iteration(a, 2, crit, 1),
                      fsvd::DimensionMismatch);
    REQUIRE_THROWS_AS(fsvd::vertical_subspace_iteration(a, 0, {}, 1), fsvd::DimensionMismatch);
    REQUIRE_THROWS_AS(fsvd::vertical_subspace_iteration(a, 9, {}, 1), fsvd::DimensionMismatch);
}

TEST_CASE("trace captures one entry per iteration") {
    const Matrix a = testutil::random_matrix(12, 9, 8);
    fsvd::IterationTrace trace;
    const auto r = fsvd::vertical_subspace_iteration(a, 2, {}, 9, &trace);
    REQUIRE(trace.h.size() == r.iterations);
    REQUIRE(trace.g.size() == r.iterations);
    REQUIRE(trace.h.back().rows() == 12);
    REQUIRE(trace.g.back().rows() == 9);
}

TEST_CASE("oracle agreement on gap-rich spectra") {
    // eigengap proviso: sigma_k - sigma_{k+1} > 0.05 sigma_1 by construction
    const struct {
        std::size_t m, n, k;
        std::uint64_t seed;
    } cases[] = {{18, 14, 3, 1}, {25, 30, 4, 2}, {30, 22, 5, 3}};
    for (const auto& tc : cases) {
        fsvd::SyntheticSpec spec;
        spec.feature_count = tc.m;
        spec.sample_count = tc.n;
        spec.spectrum = testutil::geometric_spectrum(tc.k + 3, 10.0, 0.7);
        spec.seed = tc.seed;
        const Matrix a = fsvd::generate_synthetic(spec);

        fsvd::ConvergenceCriterion crit;
        crit.epsilon = 1e-12;
        crit.max_iterations = 3000;
        const auto it = fsvd::vertical_subspace_iteration(a, tc.k, crit, tc.seed + 100);
        const auto ref = fsvd::reference_svd(a, tc.k);
        REQUIRE(it.converged);
        for (std::size_t i = 0; i < tc.k; ++i)
            REQUIRE(it.sigma[i] == Catch::Approx(ref.sigma[i]).epsilon(1e-8));
        REQUIRE(testutil::max_angle(fsvd::principal_angles(it.h, ref.h)) <= 0.01);
        REQUIRE(testutil::max_angle(fsvd::principal_angles(it.g, ref.g)) <= 0.01);
    }
}

// --- convergence test ----------------------------------------------------------

TEST_CASE("convergence criterion basics") {
    const Matrix h = fsvd::orthonormalize(testutil::random_matrix(6, 2, 15));
    REQUIRE(fsvd::converged(h, h, 0.0));

    Matrix flipped = h;
    fsvd::flip_column(flipped, 0);
    fsvd::flip_column(flipped, 1);
    REQUIRE(fsvd::converged(h, flipped, 0.0));

    // columns one degree apart fail the paper's default threshold
    const double deg = std::numbers::pi / 180.0;
    Matrix a(2, 1, {1.0, 0.0});
    Matrix b(2, 1, {std::cos(deg), std::sin(deg)});
    REQUIRE_FALSE(fsvd::converged(a, b, 1e-9));
    REQUIRE(fsvd::converged(a, b, 1.0 - std::cos(deg) + 1e-12));

    REQUIRE_THROWS_AS(fsvd::converged(a, Matrix(3, 1), 1e-9), fsvd::DimensionMismatch);
}

TEST_CASE("convergence test is symmetric under column sign flips") {
    const Matrix h = fsvd::orthonormalize(testutil::random_matrix(7, 3, 16));
    Matrix close = h;
    close(0, 1) = std::nextafter(close(0, 1), 1.0);
    for (unsigned mask = 0; mask < 8; ++mask) {
        Matrix variant = close;
        for (std::size_t j = 0; j < 3; ++j)
            if (mask & (1u << j)) fsvd::flip_column(variant, j);
        REQUIRE(fsvd::converged(h, variant, 1e-9));
    }
}

// --- metrics -------------------------------------------------------------------

TEST_CASE("principal angles") {
    const Matrix u = fsvd::orthonormalize(testutil::random_matrix(8, 3, 17));
    REQUIRE(testutil::max_angle(fsvd::principal_angles(u, u)) == 0.0);

    Matrix neg = u;
    for (std::size_t j = 0; j < 3; ++j) fsvd::flip_column(neg, j);
    REQUIRE(testutil::max_angle(fsvd::principal_angles(u, neg)) == 0.0);

    Matrix e1(2, 1, {1.0, 0.0});
    Matrix mid(2, 1, {1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)});
    REQUIRE(fsvd::principal_angles(e1, mid)[0] == Catch::Approx(45.0).margin(1e-9));

    try {
        fsvd::principal_angles(e1, Matrix(2, 1));
        FAIL("expected ZeroColumn");
    } catch (const fsvd::ZeroColumn& e) {
        REQUIRE(e.column == 0);
    }
    REQUIRE_THROWS_AS(fsvd::principal_angles(e1, Matrix(3, 1)), fsvd::DimensionMismatch);
}

TEST_CASE("pearson correlation") {
    const Matrix x(2, 2, {1, 2, 3, 4});
    REQUIRE(fsvd::pearson_correlation(x, x) == 1.0);

    Matrix neg = x;
    for (double& v : neg.data()) v = -v;
    REQUIRE(fsvd::pearson_correlation(x, neg) == -1.0);

    // hand computation: dx = (-1.5,-0.5,0.5,1.5), dy = (-3.25,-1.25,1.75,2.75)
    // r = 10.5 / sqrt(5 * 22.75) = 42 / sqrt(1820)
    const Matrix y(2, 2, {2, 4, 7, 8});
    REQUIRE(fsvd::pearson_correlation(x, y) ==
            Catch::Approx(42.0 / std::sqrt(1820.0)).epsilon(1e-12));

    REQUIRE_THROWS_AS(fsvd::pearson_correlation(x, Matrix(2, 2)), fsvd::ZeroVariance);
    REQUIRE_THROWS_AS(fsvd::pearson_correlation(x, Matrix(1, 4, {1, 2, 3, 4})),
                      fsvd::DimensionMismatch);
    REQUIRE_THROWS_AS(fsvd::pearson_correlation(Matrix(), Matrix()), fsvd::DimensionMismatch);

    const Matrix r1 = testutil::random_matrix(5, 5, 18);
    const Matrix r2 = testutil::random_matrix(5, 5, 19);
    const double r = fsvd::pearson_correlation(r1, r2);
    REQUIRE(r >= -1.0);
    REQUIRE(r <= 1.0);
}

// --- sign convention -------------------------------------------------------------

TEST_CASE("dominant row picks largest magnitude, ties to the lowest index") {
    Matrix m(3, 2, {0.5, -0.2, -0.5, 0.9, 0.1, -0.9});
    REQUIRE(fsvd::dominant_row(m, 0) == 0);  // |0.5| ties |-0.5|, lowest wins
    REQUIRE(fsvd::dominant_row(m, 1) == 1);  // |0.9| ties |-0.9|, lowest wins
}

TEST_CASE("pair normalization flips both factors together") {
    const Matrix a = testutil::random_matrix(7, 6, 20);
    const auto svd = fsvd::reference_svd(a, 3);
    Matrix h = svd.h, g = svd.g;
    fsvd::flip_column(h, 1);
    fsvd::flip_column(g, 1);

    const Matrix before = fsvd::multiply(fsvd::multiply_at_b(h, a), g);
    fsvd::sign_normalize_pair(h, g);
    const Matrix after = fsvd::multiply(fsvd::multiply_at_b(h, a), g);
    // both columns of a pair flip at once, so every diagonal product is the
    // exact same sequence of floating-point operations
    for (std::size_t j = 0; j < 3; ++j) REQUIRE(before(j, j) == after(j, j));

    for (std::size_t j = 0; j < h.cols(); ++j)
        REQUIRE(h(fsvd::dominant_row(h, j), j) > 0.0);
    REQUIRE(h.bit_equal(svd.h));  // reference output was already normalized
    REQUIRE(g.bit_equal(svd.g));

    Matrix solo = svd.h;
    fsvd::flip_column(solo, 0);
    fsvd::sign_normalize_columns(solo);
    REQUIRE(solo.bit_equal(svd.h));

    Matrix h2 = svd.h;
    Matrix g_bad(5, 2);
    REQUIRE_THROWS_AS(fsvd::sign_normalize_pair(h2, g_bad), fsvd::DimensionMismatch);
}
