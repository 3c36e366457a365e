#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/matrix.hpp"

namespace fsvd {

// Column-wise angles in degrees between same-index columns of u and v:
// arccos(min(1, |u_i . v_i| / (|u_i| |v_i|))). Sign-invariant, always in
// [0, 90]. Throws ZeroColumn if any column has zero norm.
inline std::vector<double> principal_angles(const Matrix& u, const Matrix& v) {
    if (!u.same_shape(v))
        throw DimensionMismatch("principal_angles: shapes differ");
    std::vector<double> angles(u.cols());
    for (std::size_t j = 0; j < u.cols(); ++j) {
        const double nu = column_norm(u, j);
        const double nv = column_norm(v, j);
        if (nu == 0.0) throw ZeroColumn(j, "principal_angles: zero column in first argument");
        if (nv == 0.0) throw ZeroColumn(j, "principal_angles: zero column in second argument");
        const double c = std::min(1.0, std::abs(column_dot(u, j, v, j)) / (nu * nv));
        angles[j] = std::acos(c) * 180.0 / std::numbers::pi;
    }
    return angles;
}

// Pearson product-moment correlation of the flattened entries.
inline double pearson_correlation(const Matrix& x, const Matrix& y) {
    if (!x.same_shape(y))
        throw DimensionMismatch("pearson_correlation: shapes differ");
    const std::size_t n = x.size();
    if (n == 0) throw DimensionMismatch("pearson_correlation: empty input");
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x.data()[i];
        sy += y.data()[i];
    }
    const double mx = sx / static_cast<double>(n);
    const double my = sy / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x.data()[i] - mx;
        const double dy = y.data()[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ZeroVariance("pearson_correlation: an input has zero variance");
    // rounding can push the quotient a hair past the mathematical range
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace fsvd
