#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fsvd/errors.hpp"

namespace fsvd {

// Dense row-major matrix of float64. The single value type every module
// exchanges; kept deliberately small so arithmetic stays auditable and
// bit-reproducible across runs.
class Matrix {
public:
    Matrix() : rows_(0), cols_(0) {}

    Matrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    // Takes ownership of row-major data. Rejects size mismatches and
    // non-finite entries; this is the entry point for external data.
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_)
            throw DimensionMismatch("matrix data length " + std::to_string(data_.size()) +
                                    " does not match " + std::to_string(rows_) + "x" +
                                    std::to_string(cols_));
        for (double v : data_)
            if (!std::isfinite(v))
                throw Error("matrix entry is not finite");
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    // Bitwise equality: distinguishes -0.0 from 0.0 and treats identical NaN
    // patterns as equal, which value comparison would get wrong both ways.
    bool bit_equal(const Matrix& o) const {
        return same_shape(o) &&
               std::equal(data_.begin(), data_.end(), o.data_.begin(), [](double a, double b) {
                   return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
               });
    }

    // Rows [begin, end) as a new matrix.
    Matrix row_slice(std::size_t begin, std::size_t end) const {
        if (begin > end || end > rows_)
            throw DimensionMismatch("row slice out of range");
        Matrix out(end - begin, cols_);
        std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * cols_),
                  data_.begin() + static_cast<std::ptrdiff_t>(end * cols_),
                  out.data_.begin());
        return out;
    }

    // Columns [begin, end) as a new matrix.
    Matrix col_slice(std::size_t begin, std::size_t end) const {
        if (begin > end || end > cols_)
            throw DimensionMismatch("column slice out of range");
        Matrix out(rows_, end - begin);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = begin; j < end; ++j)
                out(i, j - begin) = (*this)(i, j);
        return out;
    }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

inline Matrix transpose(const Matrix& a) {
    Matrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(j, i) = a(i, j);
    return out;
}

// a * b
inline Matrix multiply(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows())
        throw DimensionMismatch("multiply: " + std::to_string(a.rows()) + "x" +
                                std::to_string(a.cols()) + " times " + std::to_string(b.rows()) +
                                "x" + std::to_string(b.cols()));
    Matrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t l = 0; l < a.cols(); ++l) {
            const double av = a(i, l);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += av * b(l, j);
        }
    }
    return out;
}

// a^T * b without forming the transpose.
inline Matrix multiply_at_b(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows())
        throw DimensionMismatch("multiply_at_b: row counts differ");
    Matrix out(a.cols(), b.cols());
    for (std::size_t l = 0; l < a.rows(); ++l)
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double av = a(l, i);
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j)
                out(i, j) += av * b(l, j);
        }
    return out;
}

// a * b^T without forming the transpose.
inline Matrix multiply_a_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DimensionMismatch("multiply_a_bt: column counts differ");
    Matrix out(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double s = 0.0;
            for (std::size_t l = 0; l < a.cols(); ++l) s += a(i, l) * b(j, l);
            out(i, j) = s;
        }
    return out;
}

inline Matrix add(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("add: shapes differ");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] += b.data()[i];
    return out;
}

inline Matrix subtract(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("subtract: shapes differ");
    Matrix out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.data()[i] -= b.data()[i];
    return out;
}

inline void add_in_place(Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("add_in_place: shapes differ");
    for (std::size_t i = 0; i < a.size(); ++i) a.data()[i] += b.data()[i];
}

inline Matrix scale(const Matrix& a, double s) {
    Matrix out = a;
    for (double& v : out.data()) v *= s;
    return out;
}

inline double frobenius_norm(const Matrix& a) {
    double s = 0.0;
    for (double v : a.data()) s += v * v;
    return std::sqrt(s);
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) throw DimensionMismatch("max_abs_diff: shapes differ");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

inline double column_dot(const Matrix& a, std::size_t ja, const Matrix& b, std::size_t jb) {
    if (a.rows() != b.rows())
        throw DimensionMismatch("column_dot: row counts differ");
    double s = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i) s += a(i, ja) * b(i, jb);
    return s;
}

inline double column_norm(const Matrix& a, std::size_t j) {
    return std::sqrt(column_dot(a, j, a, j));
}

inline std::vector<double> get_column(const Matrix& a, std::size_t j) {
    std::vector<double> c(a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) c[i] = a(i, j);
    return c;
}

inline void set_column(Matrix& a, std::size_t j, const std::vector<double>& c) {
    if (c.size() != a.rows()) throw DimensionMismatch("set_column: length mismatch");
    for (std::size_t i = 0; i < a.rows(); ++i) a(i, j) = c[i];
}

// Appends the columns of `b` to the right of `a`.
inline Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw DimensionMismatch("hstack: row counts differ");
    Matrix out(a.rows(), a.cols() + b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = a(i, j);
        for (std::size_t j = 0; j < b.cols(); ++j) out(i, a.cols() + j) = b(i, j);
    }
    return out;
}

inline Matrix vstack(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw DimensionMismatch("vstack: column counts differ");
    Matrix out(a.rows() + b.rows(), a.cols());
    std::copy(a.data().begin(), a.data().end(), out.data().begin());
    std::copy(b.data().begin(), b.data().end(),
              out.data().begin() + static_cast<std::ptrdiff_t>(a.size()));
    return out;
}

}  // namespace fsvd
