#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/gram_schmidt.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/rng.hpp"

namespace fsvd {

// Column-partitioned view of a feature-by-sample matrix: site s holds the
// contiguous column block [offsets[s], offsets[s] + blocks[s].cols()).
struct VerticalPartition {
    std::vector<Matrix> blocks;
    std::vector<std::size_t> offsets;

    std::size_t sites() const { return blocks.size(); }
    std::size_t feature_count() const { return blocks.empty() ? 0 : blocks[0].rows(); }
    std::size_t sample_count() const {
        std::size_t n = 0;
        for (const auto& b : blocks) n += b.cols();
        return n;
    }
};

// Largest-remainder apportionment of n columns over positive weights, with
// two deterministic tie rules: equal fractional remainders favor the lower
// site index, and any site left empty takes one column from the currently
// largest block (lowest index on ties). Every site ends up with at least one
// column; blocks stay contiguous and in original column order.
inline std::vector<std::size_t> apportion_columns(std::size_t n,
                                                  const std::vector<double>& weights) {
    const std::size_t s = weights.size();
    if (s == 0) throw ConfigError("apportion_columns: no sites");
    for (double w : weights)
        if (!(w > 0.0)) throw ConfigError("apportion_columns: weights must be positive");
    if (n < s)
        throw TooManySites("cannot give " + std::to_string(s) + " sites at least one of " +
                           std::to_string(n) + " columns");

    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    std::vector<std::size_t> sizes(s);
    std::vector<double> frac(s);
    std::size_t assigned = 0;
    for (std::size_t i = 0; i < s; ++i) {
        const double quota = static_cast<double>(n) * weights[i] / total;
        sizes[i] = static_cast<std::size_t>(std::floor(quota));
        frac[i] = quota - std::floor(quota);
        assigned += sizes[i];
    }
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
    for (std::size_t i = 0; assigned < n; ++i) {
        ++sizes[order[i % s]];
        ++assigned;
    }
    for (std::size_t i = 0; i < s; ++i) {
        while (sizes[i] == 0) {
            const std::size_t donor = static_cast<std::size_t>(
                std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
            --sizes[donor];
            ++sizes[i];
        }
    }
    return sizes;
}

inline VerticalPartition split_columns(const Matrix& a, const std::vector<double>& weights) {
    const std::vector<std::size_t> sizes = apportion_columns(a.cols(), weights);
    VerticalPartition p;
    std::size_t offset = 0;
    for (std::size_t size : sizes) {
        p.blocks.push_back(a.col_slice(offset, offset + size));
        p.offsets.push_back(offset);
        offset += size;
    }
    return p;
}

inline VerticalPartition split_columns(const Matrix& a, std::size_t sites) {
    return split_columns(a, std::vector<double>(sites, 1.0));
}

// Reassembles per-site right-factor blocks (n_s x k each) into the global
// n x k matrix, in site order.
inline Matrix stack_right_blocks(const std::vector<Matrix>& blocks) {
    if (blocks.empty()) throw DimensionMismatch("stack_right_blocks: no blocks");
    Matrix out = blocks[0];
    for (std::size_t s = 1; s < blocks.size(); ++s) out = vstack(out, blocks[s]);
    return out;
}

struct SyntheticSpec {
    std::size_t feature_count = 0;
    std::size_t sample_count = 0;
    std::vector<double> spectrum;  // positive, non-increasing
    std::uint64_t seed = 1;
};

// Data with a known truncated SVD: a = h diag(spectrum) g^T where h and g are
// orthonormalized gaussian factors drawn from one seeded stream (h first,
// then g). Rank equals spectrum length, so spectra shorter than min(m, n)
// give exactly rank-deficient data.
inline Matrix generate_synthetic(const SyntheticSpec& spec) {
    const std::size_t m = spec.feature_count;
    const std::size_t n = spec.sample_count;
    const std::size_t r = spec.spectrum.size();
    if (r == 0 || r > std::min(m, n))
        throw ConfigError("generate_synthetic: spectrum length out of range");
    for (std::size_t i = 0; i < r; ++i) {
        if (!(spec.spectrum[i] > 0.0))
            throw ConfigError("generate_synthetic: spectrum must be positive");
        if (i > 0 && spec.spectrum[i] > spec.spectrum[i - 1])
            throw ConfigError("generate_synthetic: spectrum must be non-increasing");
    }

    Rng rng(spec.seed);
    const Matrix h = orthonormalize(gaussian_matrix(m, r, rng));
    const Matrix g = orthonormalize(gaussian_matrix(n, r, rng));
    Matrix out(m, n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double v = 0.0;
            for (std::size_t l = 0; l < r; ++l) v += h(i, l) * spec.spectrum[l] * g(j, l);
            out(i, j) = v;
        }
    return out;
}

}  // namespace fsvd
