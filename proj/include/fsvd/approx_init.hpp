#pragma once

#include <string>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/message.hpp"
#include "fsvd/partition.hpp"
#include "fsvd/reference_svd.hpp"
#include "fsvd/transport.hpp"

namespace fsvd {

struct ApproxInitResult {
    std::vector<Matrix> g_blocks;  // n_s x k per site, not orthonormalized
    Matrix h;                      // m x k shared subspace estimate
};

// Single-round subspace seeding: every site decomposes its own block and
// ships the top c*k left singular vectors; the aggregator stacks the
// transposed subspaces, keeps the top-k right singular vectors of the stack
// as the shared H, and each site projects its block onto it. With a
// transport attached the exchange is played over it (S uploads of c*k x m,
// one m x k broadcast); without one the arithmetic is identical and silent.
inline ApproxInitResult approximate_init(const VerticalPartition& p, std::size_t k,
                                         std::size_t c, Transport* t = nullptr) {
    const std::size_t sites = p.sites();
    if (sites == 0) throw ConfigError("approximate_init: empty partition");
    const std::size_t m = p.feature_count();
    if (k == 0 || c == 0) throw ConfigError("approximate_init: k and c must be positive");
    const std::size_t ck = c * k;
    if (ck > m)
        throw ConfigError("approximate_init: c*k = " + std::to_string(ck) +
                          " exceeds the feature count " + std::to_string(m));
    for (std::size_t s = 0; s < sites; ++s)
        if (ck > p.blocks[s].cols())
            throw ConfigError("approximate_init: c*k = " + std::to_string(ck) +
                              " exceeds the sample count of site " + std::to_string(s));

    std::vector<Matrix> uploads(sites);
    for (std::size_t s = 0; s < sites; ++s) {
        // row i of the upload is sigma_i * h_i^T, so the stack's Gram equals
        // the sum of rank-truncated local feature covariances A_s A_s^T --
        // unweighted unit vectors would degenerate it into a sum of
        // projectors and lose the eigenvalue ordering. A block whose
        // numerical rank falls short of c*k contributes its whole row space;
        // the remaining rows stay zero (sigma = 0), keeping the upload shape
        // and transmission cost data-independent.
        const SvdResult local = reference_svd_up_to(p.blocks[s], ck);
        Matrix up(ck, m);
        for (std::size_t i = 0; i < local.sigma.size(); ++i)
            for (std::size_t j = 0; j < m; ++j) up(i, j) = local.sigma[i] * local.h(j, i);
        uploads[s] = std::move(up);
        if (t)
            t->send_to_aggregator(
                make_message(MessageKind::LocalSubspace, static_cast<std::uint32_t>(s), uploads[s]));
    }

    Matrix stacked;
    if (t) {
        const std::vector<Message> collected = t->collect_from_clients(sites);
        stacked = collected[0].payload;
        for (std::size_t s = 1; s < sites; ++s) stacked = vstack(stacked, collected[s].payload);
    } else {
        stacked = stack_right_blocks(uploads);
    }

    const SvdResult top = reference_svd(stacked, k);
    Matrix h_hat = top.g;  // m x k

    if (t) {
        t->broadcast(make_message(MessageKind::GlobalH, kAggregatorId, h_hat));
        Matrix received;
        for (std::size_t s = 0; s < sites; ++s)
            received = t->receive_broadcast(static_cast<std::uint32_t>(s)).payload;
        h_hat = std::move(received);
    }

    ApproxInitResult out;
    out.h = h_hat;
    out.g_blocks.resize(sites);
    for (std::size_t s = 0; s < sites; ++s)
        out.g_blocks[s] = multiply_at_b(p.blocks[s], h_hat);
    return out;
}

}  // namespace fsvd
