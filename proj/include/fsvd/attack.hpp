#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/gram_schmidt.hpp"
#include "fsvd/io.hpp"
#include "fsvd/jacobi.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/metrics.hpp"

namespace fsvd {

// What an honest-but-curious aggregator can write down without deviating
// from the protocol: each orthonormalized H it broadcast, paired with the
// next raw partial sum the clients returned. When the clients never
// orthonormalize their right factors between those two events, the raw sum
// equals (A A^T) times the broadcast, so every pair contributes k linear
// equations in the unknown covariance.
class AttackTranscript {
public:
    struct Pair {
        std::uint64_t round;  // iteration at which the raw sum arrived
        Matrix broadcast;     // orthonormalized H_{i-1} as sent to clients
        Matrix raw;           // summed H_i before orthonormalization
    };

    void observe_raw(std::uint64_t round, const Matrix& h_raw) {
        if (pending_.has_value()) pairs_.push_back({round, *pending_, h_raw});
    }

    void observe_broadcast(std::uint64_t, const Matrix& h) { pending_ = h; }

    const std::vector<Pair>& pairs() const { return pairs_; }
    bool empty() const { return pairs_.empty(); }

private:
    std::optional<Matrix> pending_;
    std::vector<Pair> pairs_;
};

// Admission threshold for transcript columns: a candidate joins the system
// only while the admitted set keeps smallest/largest singular value above
// this ratio.
inline constexpr double kAttackAdmissionTolerance = 1e-10;

struct LinearSystem {
    Matrix lhs;  // m x m' broadcast columns
    Matrix rhs;  // m x m' matching raw columns
};

namespace detail {

inline std::pair<double, double> extreme_singular_values(const Matrix& a) {
    const SymmetricEigen eig = jacobi_eigen(multiply_at_b(a, a));
    const double hi = std::sqrt(std::max(eig.values.front(), 0.0));
    const double lo = std::sqrt(std::max(eig.values.back(), 0.0));
    return {lo, hi};
}

// Column-pivoted Householder QR. Forming lhs^T lhs would square the
// condition number and the admission tolerance deliberately lets systems
// within 1e10 of singular through, so the solve has to work on lhs itself.
struct PivotedQr {
    Matrix q;                      // m x c, orthonormal columns
    Matrix r;                      // c x c, upper triangular, |r_00| maximal
    std::vector<std::size_t> perm; // column j of q*r is input column perm[j]
};

inline PivotedQr pivoted_qr(const Matrix& a) {
    const std::size_t m = a.rows();
    const std::size_t c = a.cols();
    Matrix w = a;
    std::vector<std::size_t> perm(c);
    for (std::size_t j = 0; j < c; ++j) perm[j] = j;
    std::vector<std::vector<double>> reflectors;
    std::vector<double> betas;
    reflectors.reserve(c);
    betas.reserve(c);

    for (std::size_t t = 0; t < c; ++t) {
        std::size_t best = t;
        double best_sq = -1.0;
        for (std::size_t j = t; j < c; ++j) {
            double sq = 0.0;
            for (std::size_t i = t; i < m; ++i) sq += w(i, j) * w(i, j);
            if (sq > best_sq) {
                best_sq = sq;
                best = j;
            }
        }
        if (best != t) {
            for (std::size_t i = 0; i < m; ++i) std::swap(w(i, t), w(i, best));
            std::swap(perm[t], perm[best]);
        }

        std::vector<double> v(m - t, 0.0);
        double beta = 0.0;
        const double norm = std::sqrt(std::max(best_sq, 0.0));
        if (norm > 0.0) {
            const double alpha = w(t, t) >= 0.0 ? -norm : norm;
            for (std::size_t i = t; i < m; ++i) v[i - t] = w(i, t);
            v[0] -= alpha;
            double vsq = 0.0;
            for (double x : v) vsq += x * x;
            if (vsq > 0.0) {
                beta = 2.0 / vsq;
                for (std::size_t j = t; j < c; ++j) {
                    double dot = 0.0;
                    for (std::size_t i = t; i < m; ++i) dot += v[i - t] * w(i, j);
                    const double scale = beta * dot;
                    for (std::size_t i = t; i < m; ++i) w(i, j) -= scale * v[i - t];
                }
                w(t, t) = alpha;  // cancellation-free form of the rotated pivot
            }
        }
        reflectors.push_back(std::move(v));
        betas.push_back(beta);
    }

    PivotedQr out;
    out.perm = std::move(perm);
    out.r = Matrix(c, c);
    for (std::size_t i = 0; i < c; ++i)
        for (std::size_t j = i; j < c; ++j) out.r(i, j) = w(i, j);

    out.q = Matrix(m, c);
    for (std::size_t j = 0; j < c; ++j) out.q(j, j) = 1.0;
    for (std::size_t t = c; t-- > 0;) {
        if (betas[t] == 0.0) continue;
        const std::vector<double>& v = reflectors[t];
        for (std::size_t j = 0; j < c; ++j) {
            double dot = 0.0;
            for (std::size_t i = t; i < m; ++i) dot += v[i - t] * out.q(i, j);
            const double scale = betas[t] * dot;
            for (std::size_t i = t; i < m; ++i) out.q(i, j) -= scale * v[i - t];
        }
    }
    return out;
}

}  // namespace detail

// Greedily admits transcript columns until m independent ones are collected.
// Throws InsufficientRank with the admitted count when the transcript runs
// out first, unless the caller accepts an underdetermined system.
inline LinearSystem build_linear_system(const AttackTranscript& t, std::size_t m, std::size_t k,
                                        bool allow_underdetermined = false) {
    std::vector<std::vector<double>> lhs_cols, rhs_cols;
    for (const auto& pair : t.pairs()) {
        if (pair.broadcast.rows() != m || pair.broadcast.cols() != k ||
            pair.raw.rows() != m || pair.raw.cols() != k)
            throw DimensionMismatch("build_linear_system: transcript pair has unexpected shape");
        for (std::size_t j = 0; j < k && lhs_cols.size() < m; ++j) {
            Matrix tentative(m, lhs_cols.size() + 1);
            for (std::size_t col = 0; col < lhs_cols.size(); ++col)
                for (std::size_t row = 0; row < m; ++row)
                    tentative(row, col) = lhs_cols[col][row];
            for (std::size_t row = 0; row < m; ++row)
                tentative(row, lhs_cols.size()) = pair.broadcast(row, j);
            const auto [lo, hi] = detail::extreme_singular_values(tentative);
            if (lo > kAttackAdmissionTolerance * hi) {
                lhs_cols.push_back(get_column(pair.broadcast, j));
                rhs_cols.push_back(get_column(pair.raw, j));
            }
        }
        if (lhs_cols.size() == m) break;
    }
    if (lhs_cols.size() < m && !allow_underdetermined)
        throw InsufficientRank(lhs_cols.size(),
                               "transcript yields only " + std::to_string(lhs_cols.size()) +
                                   " independent columns, need " + std::to_string(m));
    if (lhs_cols.empty())
        throw InsufficientRank(0, "transcript yields no usable columns");

    LinearSystem sys{Matrix(m, lhs_cols.size()), Matrix(m, rhs_cols.size())};
    for (std::size_t col = 0; col < lhs_cols.size(); ++col)
        for (std::size_t row = 0; row < m; ++row) {
            sys.lhs(row, col) = lhs_cols[col][row];
            sys.rhs(row, col) = rhs_cols[col][row];
        }
    return sys;
}

struct ReconstructionReport {
    Matrix k_hat;
    std::size_t columns_used = 0;
    double residual = 0.0;  // |K lhs - rhs|_F / |rhs|_F
    bool truth_available = false;
    double pearson = 0.0;
    double elapsed_seconds = 0.0;
};

// Least-squares estimate K = rhs * pinv(lhs), with the pseudoinverse taken
// through a column-pivoted orthogonal factorization of lhs; pivots below
// kRankTolerance times the leading pivot are dropped.
inline ReconstructionReport reconstruct_covariance(const AttackTranscript& t, std::size_t m,
                                                   std::size_t k, const Matrix* truth = nullptr,
                                                   bool allow_underdetermined = false) {
    const auto start = std::chrono::steady_clock::now();
    const LinearSystem sys = build_linear_system(t, m, k, allow_underdetermined);
    const std::size_t cols = sys.lhs.cols();

    const detail::PivotedQr qr = detail::pivoted_qr(sys.lhs);
    const double pivot_max = std::abs(qr.r(0, 0));
    if (pivot_max == 0.0)
        throw NumericallySingular("reconstruct_covariance: zero linear system");
    std::size_t rank = 0;
    while (rank < cols && std::abs(qr.r(rank, rank)) > kRankTolerance * pivot_max) ++rank;

    Matrix permuted_rhs(m, rank);  // rhs columns reordered like the lhs pivots
    for (std::size_t j = 0; j < rank; ++j)
        for (std::size_t i = 0; i < m; ++i) permuted_rhs(i, j) = sys.rhs(i, qr.perm[j]);

    Matrix y(m, rank);  // solves y * r = permuted_rhs on the retained block
    for (std::size_t j = 0; j < rank; ++j) {
        const double inv = 1.0 / qr.r(j, j);
        for (std::size_t i = 0; i < m; ++i) {
            double acc = permuted_rhs(i, j);
            for (std::size_t l = 0; l < j; ++l) acc -= y(i, l) * qr.r(l, j);
            y(i, j) = acc * inv;
        }
    }

    ReconstructionReport report;
    report.k_hat = multiply_a_bt(y, qr.q.col_slice(0, rank));
    report.columns_used = cols;

    const Matrix fit = multiply(report.k_hat, sys.lhs);
    const double rhs_norm = frobenius_norm(sys.rhs);
    report.residual = rhs_norm > 0.0 ? frobenius_norm(subtract(fit, sys.rhs)) / rhs_norm : 0.0;

    if (truth) {
        report.truth_available = true;
        report.pearson = pearson_correlation(report.k_hat, *truth);
    }
    report.elapsed_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

// Dumps every recorded pair as bit-exact matrix files plus a plain-text
// index, one line per matrix: round, role, rows, cols, filename.
inline void export_attack_transcript(const AttackTranscript& t, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::ofstream index(fs::path(dir) / "index.txt");
    if (!index) throw ConfigError("cannot write transcript index in '" + dir + "'");
    std::size_t idx = 0;
    for (const auto& pair : t.pairs()) {
        const std::string b_name = "pair" + std::to_string(idx) + "_broadcast.bin";
        const std::string r_name = "pair" + std::to_string(idx) + "_raw.bin";
        save_matrix(pair.broadcast, (fs::path(dir) / b_name).string());
        save_matrix(pair.raw, (fs::path(dir) / r_name).string());
        index << pair.round << " broadcast " << pair.broadcast.rows() << ' '
              << pair.broadcast.cols() << ' ' << b_name << '\n';
        index << pair.round << " raw " << pair.raw.rows() << ' ' << pair.raw.cols() << ' '
              << r_name << '\n';
        ++idx;
    }
}

}  // namespace fsvd
