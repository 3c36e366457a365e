#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "fsvd/attack.hpp"
#include "fsvd/federation.hpp"
#include "fsvd/jacobi.hpp"

namespace fsvd {

// Randomized variant: I' plain warm-up iterations (no orthonormalization of
// the right factors, convergence never tested) purely to collect the
// broadcast H_1..H_I'. Their transposes stacked form the sketch P (k*I' x m)
// every client already holds; each site then compresses its block to
// A_hat_s = P A_s and uploads only the proxy covariance A_hat_s A_hat_s^T.
// The aggregator sums those, eigendecomposes, and broadcasts the top-k
// eigenvectors; sites lift them back through their local A_hat_s, the lifted
// right factors get one federated Gram-Schmidt (the run's mandatory final
// orthonormalization), and a last exchange produces the global H.
//
// Nothing with a sample dimension ever leaves a site, and the full-width
// m x k broadcasts number exactly i_prime + 1.
inline FederatedResult federated_randomized_svd(const VerticalPartition& p,
                                                const ProtocolConfig& cfg, Transport& t,
                                                FederatedTrace* trace = nullptr,
                                                AttackTranscript* attack = nullptr) {
    const std::size_t sites = p.sites();
    if (sites == 0) throw ConfigError("federated_randomized_svd: empty partition");
    if (sites != t.sites())
        throw TransportError("federated_randomized_svd: partition/transport site mismatch");
    const std::size_t m = p.feature_count();
    const std::size_t n = p.sample_count();
    const std::size_t k = cfg.k;
    const std::size_t warmup = cfg.i_prime;
    if (k == 0 || k > std::min(m, n))
        throw ConfigError("federated_randomized_svd: k out of range");
    if (warmup == 0) throw ConfigError("federated_randomized_svd: i_prime must be positive");

    std::vector<Matrix> g_blocks(sites);
    const Matrix g0 = gaussian_matrix(n, k, cfg.seed);
    for (std::size_t s = 0; s < sites; ++s)
        g_blocks[s] = g0.row_slice(p.offsets[s], p.offsets[s] + p.blocks[s].cols());

    std::vector<Matrix> sketch;  // broadcast H per warm-up iteration
    sketch.reserve(warmup);
    Matrix h;
    for (std::size_t i = 1; i <= warmup; ++i) {
        for (std::size_t s = 0; s < sites; ++s)
            t.send_to_aggregator(make_message(MessageKind::PartialH,
                                              static_cast<std::uint32_t>(s),
                                              multiply(p.blocks[s], g_blocks[s])));
        const std::vector<Message> partials = t.collect_from_clients(sites);
        Matrix h_raw = partials[0].payload;
        for (std::size_t s = 1; s < sites; ++s) add_in_place(h_raw, partials[s].payload);
        if (attack) attack->observe_raw(i, h_raw);
        h = gram_schmidt(h_raw).q;
        if (attack) attack->observe_broadcast(i, h);
        t.broadcast(make_message(MessageKind::GlobalH, kAggregatorId, h));
        for (std::size_t s = 0; s < sites; ++s) {
            const Matrix shared = t.receive_broadcast(static_cast<std::uint32_t>(s)).payload;
            g_blocks[s] = multiply_at_b(p.blocks[s], shared);
        }
        sketch.push_back(h);
        if (trace) {
            trace->h.push_back(h);
            trace->g.push_back(stack_right_blocks(g_blocks));
        }
    }

    Matrix sketch_p(k * warmup, m);  // rows: h_1^T, h_2^T, ...
    for (std::size_t i = 0; i < warmup; ++i)
        for (std::size_t j = 0; j < k; ++j)
            for (std::size_t col = 0; col < m; ++col)
                sketch_p(i * k + j, col) = sketch[i](col, j);

    std::vector<Matrix> compressed(sites);  // k*I' x n_s, stays local
    for (std::size_t s = 0; s < sites; ++s) {
        compressed[s] = multiply(sketch_p, p.blocks[s]);
        t.send_to_aggregator(make_message(MessageKind::ProxyCov, static_cast<std::uint32_t>(s),
                                          multiply_a_bt(compressed[s], compressed[s])));
    }
    const std::vector<Message> proxies = t.collect_from_clients(sites);
    Matrix proxy_sum = proxies[0].payload;
    for (std::size_t s = 1; s < sites; ++s) add_in_place(proxy_sum, proxies[s].payload);

    // Warm-up iterates overlap more and more as the iteration settles, so a
    // plain eigendecomposition of the summed proxy covariance would be biased
    // by the sketch's own gram matrix. Whitening against P P^T -- which every
    // participant can form from the broadcasts -- turns the step into an
    // exact Rayleigh-Ritz extraction over span(P^T) at no transmission cost.
    // Sketch directions below the gram's numerical precision are dropped.
    const SymmetricEigen span_eig = jacobi_eigen(multiply_a_bt(sketch_p, sketch_p));
    const double span_max = std::max(span_eig.values[0], 0.0);
    std::size_t span_dim = 0;
    while (span_dim < span_eig.values.size() &&
           span_eig.values[span_dim] > kRankTolerance * span_max)
        ++span_dim;
    if (span_dim < k)
        throw RankDeficient(span_dim, "sketch spans only " + std::to_string(span_dim) +
                                          " usable directions, need " + std::to_string(k));
    Matrix whitener(k * warmup, span_dim);  // maps span coordinates back to sketch rows
    for (std::size_t j = 0; j < span_dim; ++j) {
        const double inv = 1.0 / std::sqrt(span_eig.values[j]);
        for (std::size_t i = 0; i < k * warmup; ++i)
            whitener(i, j) = span_eig.vectors(i, j) * inv;
    }
    const Matrix reduced = multiply_at_b(whitener, multiply(proxy_sum, whitener));
    const SymmetricEigen eig = jacobi_eigen(reduced);
    const double sigma_max = std::sqrt(std::max(eig.values[0], 0.0));
    for (std::size_t i = 0; i < k; ++i)
        if (std::sqrt(std::max(eig.values[i], 0.0)) <= kRankTolerance * sigma_max)
            throw RankDeficient(i, "proxy covariance offers only " + std::to_string(i) +
                                       " usable directions, need " + std::to_string(k));
    const Matrix proxy_basis = multiply(whitener, eig.vectors.col_slice(0, k));  // k*I' x k

    t.broadcast(make_message(MessageKind::ProxyEigvecs, kAggregatorId, proxy_basis));
    for (std::size_t s = 0; s < sites; ++s) {
        const Matrix shared = t.receive_broadcast(static_cast<std::uint32_t>(s)).payload;
        g_blocks[s] = multiply_at_b(compressed[s], shared);  // n_s x k
    }

    federated_gram_schmidt(g_blocks, t);

    for (std::size_t s = 0; s < sites; ++s)
        t.send_to_aggregator(make_message(MessageKind::PartialH, static_cast<std::uint32_t>(s),
                                          multiply(p.blocks[s], g_blocks[s])));
    const std::vector<Message> finals = t.collect_from_clients(sites);
    Matrix h_raw = finals[0].payload;
    for (std::size_t s = 1; s < sites; ++s) add_in_place(h_raw, finals[s].payload);
    if (attack) attack->observe_raw(warmup + 1, h_raw);
    h = gram_schmidt(h_raw).q;
    if (attack) attack->observe_broadcast(warmup + 1, h);
    t.broadcast(make_message(MessageKind::GlobalH, kAggregatorId, h));
    for (std::size_t s = 0; s < sites; ++s)
        t.receive_broadcast(static_cast<std::uint32_t>(s));
    if (trace) {
        trace->h.push_back(h);
        trace->g.push_back(stack_right_blocks(g_blocks));
    }

    t.broadcast(make_message(MessageKind::Terminate, kAggregatorId, Matrix()));
    for (std::size_t s = 0; s < sites; ++s)
        t.receive_broadcast(static_cast<std::uint32_t>(s));

    FederatedResult out;
    out.g_blocks = std::move(g_blocks);
    out.h = std::move(h);
    out.iterations = warmup;
    out.converged = true;  // single-shot: the criterion is not part of this variant
    return out;
}

}  // namespace fsvd
