#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fsvd/approx_init.hpp"
#include "fsvd/attack.hpp"
#include "fsvd/costs.hpp"
#include "fsvd/errors.hpp"
#include "fsvd/gram_schmidt.hpp"
#include "fsvd/matrix.hpp"
#include "fsvd/message.hpp"
#include "fsvd/partition.hpp"
#include "fsvd/rng.hpp"
#include "fsvd/subspace_iteration.hpp"
#include "fsvd/transport.hpp"

namespace fsvd {

enum class InitMode { Random, Approximate };

struct ProtocolConfig {
    std::size_t k = 10;
    ConvergenceCriterion criterion;
    OrthoMode ortho = OrthoMode::FinalOnly;
    InitMode init = InitMode::Random;
    std::size_t c = 2;        // approximate-init oversampling factor
    std::size_t i_prime = 10; // warm-up iterations of the randomized variant
    std::uint64_t seed = 0;
};

struct FederatedTrace {
    std::vector<Matrix> h;  // broadcast H per iteration
    std::vector<Matrix> g;  // stacked right blocks per iteration
};

struct FederatedResult {
    std::vector<Matrix> g_blocks;  // orthonormal after the mandatory final pass
    Matrix h;
    std::size_t iterations = 0;
    bool converged = false;
};

namespace detail {

// Federated Gram-Schmidt over row-partitioned blocks, orthonormalizing the k
// shared columns in place. Only scalars travel: squared norms and residual
// coefficients, each computed per site against the globally shared norms and
// summed by the aggregator. Per-element arithmetic matches the centralized
// gram_schmidt() exactly, so a single-site run is bit-identical to it.
//
// Exchange pattern per invocation: S*(2k-1) uploads in 2k-1 rounds, with
// S*k*(k+1)/2 floats in each direction.
inline std::vector<double> federated_gram_schmidt_impl(std::vector<Matrix*>& blocks,
                                                       Transport& t) {
    const std::size_t sites = blocks.size();
    if (sites == 0 || sites != t.sites())
        throw TransportError("federated_gram_schmidt: block count does not match transport");
    const std::size_t k = blocks[0]->cols();
    if (k == 0) throw DimensionMismatch("federated_gram_schmidt: no columns");
    for (const Matrix* b : blocks)
        if (b->cols() != k)
            throw DimensionMismatch("federated_gram_schmidt: blocks disagree on column count");

    // originals, kept for the residual products of later columns
    std::vector<Matrix> v;
    v.reserve(sites);
    for (const Matrix* b : blocks) v.push_back(*b);

    std::vector<double> norms(k, 0.0);
    double norm_scale = 0.0;

    const auto exchange_norm = [&](std::size_t i) {
        for (std::size_t s = 0; s < sites; ++s)
            t.send_to_aggregator(scalar_message(MessageKind::PartialNorm,
                                                static_cast<std::uint32_t>(s),
                                                column_dot(*blocks[s], i, *blocks[s], i)));
        double total = 0.0;
        for (const Message& msg : t.collect_from_clients(sites)) total += msg.payload(0, 0);
        norm_scale = std::max(norm_scale, total);
        if (total <= kRankTolerance * norm_scale)
            throw RankDeficient(i, "federated column " + std::to_string(i) +
                                       " is linearly dependent on earlier columns");
        t.broadcast(scalar_message(MessageKind::GlobalNorm, kAggregatorId, total));
        for (std::size_t s = 0; s < sites; ++s)
            norms[i] = t.receive_broadcast(static_cast<std::uint32_t>(s)).payload(0, 0);
    };

    exchange_norm(0);
    for (std::size_t i = 1; i < k; ++i) {
        for (std::size_t s = 0; s < sites; ++s) {
            Matrix local(i, 1);
            for (std::size_t j = 0; j < i; ++j)
                local(j, 0) = column_dot(*blocks[s], j, v[s], i) / norms[j];
            t.send_to_aggregator(make_message(MessageKind::PartialResiduals,
                                              static_cast<std::uint32_t>(s), std::move(local)));
        }
        Matrix r(i, 1);
        for (const Message& msg : t.collect_from_clients(sites)) add_in_place(r, msg.payload);
        t.broadcast(make_message(MessageKind::GlobalResiduals, kAggregatorId, r));
        for (std::size_t s = 0; s < sites; ++s) {
            const Matrix shared = t.receive_broadcast(static_cast<std::uint32_t>(s)).payload;
            Matrix& u = *blocks[s];
            for (std::size_t row = 0; row < u.rows(); ++row) {
                double acc = v[s](row, i);
                for (std::size_t j = 0; j < i; ++j) acc -= shared(j, 0) * u(row, j);
                u(row, i) = acc;
            }
        }
        exchange_norm(i);
    }

    for (std::size_t s = 0; s < sites; ++s) {
        Matrix& u = *blocks[s];
        for (std::size_t i = 0; i < k; ++i) {
            const double inv = 1.0 / std::sqrt(norms[i]);
            for (std::size_t row = 0; row < u.rows(); ++row) u(row, i) *= inv;
        }
    }
    return norms;
}

}  // namespace detail

struct FederatedGsResult {
    std::vector<double> norms;  // global squared norms before scaling
};

inline FederatedGsResult federated_gram_schmidt(std::vector<Matrix>& blocks, Transport& t) {
    std::vector<Matrix*> refs;
    refs.reserve(blocks.size());
    for (Matrix& b : blocks) refs.push_back(&b);
    return {detail::federated_gram_schmidt_impl(refs, t)};
}

// Star-topology vertical subspace iteration (the simulator's main loop).
// Each iteration: sites upload A_s G_s, the aggregator sums the partials in
// ascending site order, orthonormalizes, checks the convergence criterion
// against the previous broadcast, and broadcasts the new H; sites then
// update G_s = A_s^T H locally. The right factors are orthonormalized via
// federated Gram-Schmidt every iteration under OrthoMode::PerIteration,
// otherwise exactly once after the loop (the final orthonormalization is
// unconditional; in per-iteration mode the last loop pass already provides
// it). A Terminate broadcast closes the run.
//
// Under Random init the full n x k gaussian G0 is drawn from the seed in
// row-major order and sliced to sites by their column offsets, so any site
// count shares one stream. Under Approximate init the blocks come from
// approximate_init() and start un-orthonormalized.
inline FederatedResult federated_subspace_iteration(const VerticalPartition& p,
                                                    const ProtocolConfig& cfg, Transport& t,
                                                    FederatedTrace* trace = nullptr,
                                                    AttackTranscript* attack = nullptr) {
    const std::size_t sites = p.sites();
    if (sites == 0) throw ConfigError("federated_subspace_iteration: empty partition");
    if (sites != t.sites())
        throw TransportError("federated_subspace_iteration: partition/transport site mismatch");
    const std::size_t m = p.feature_count();
    const std::size_t n = p.sample_count();
    const std::size_t k = cfg.k;
    if (k == 0 || k > std::min(m, n))
        throw ConfigError("federated_subspace_iteration: k out of range");
    if (cfg.criterion.max_iterations == 0)
        throw ConfigError("federated_subspace_iteration: max_iterations must be positive");

    std::vector<Matrix> g_blocks(sites);
    if (cfg.init == InitMode::Random) {
        const Matrix g0 = gaussian_matrix(n, k, cfg.seed);
        for (std::size_t s = 0; s < sites; ++s)
            g_blocks[s] = g0.row_slice(p.offsets[s], p.offsets[s] + p.blocks[s].cols());
        if (cfg.ortho == OrthoMode::PerIteration) federated_gram_schmidt(g_blocks, t);
    } else {
        g_blocks = approximate_init(p, k, cfg.c, &t).g_blocks;
    }

    Matrix h;
    Matrix h_prev;
    bool done = false;
    std::size_t iterations = 0;

    for (std::size_t i = 1; i <= cfg.criterion.max_iterations; ++i) {
        for (std::size_t s = 0; s < sites; ++s)
            t.send_to_aggregator(make_message(MessageKind::PartialH,
                                              static_cast<std::uint32_t>(s),
                                              multiply(p.blocks[s], g_blocks[s])));
        const std::vector<Message> partials = t.collect_from_clients(sites);
        Matrix h_raw = partials[0].payload;
        for (std::size_t s = 1; s < sites; ++s) add_in_place(h_raw, partials[s].payload);
        if (attack) attack->observe_raw(i, h_raw);

        h = gram_schmidt(h_raw).q;
        done = i >= 2 && converged(h_prev, h, cfg.criterion.epsilon);
        if (attack) attack->observe_broadcast(i, h);
        t.broadcast(make_message(MessageKind::GlobalH, kAggregatorId, h));
        for (std::size_t s = 0; s < sites; ++s) {
            const Matrix shared = t.receive_broadcast(static_cast<std::uint32_t>(s)).payload;
            g_blocks[s] = multiply_at_b(p.blocks[s], shared);
        }
        if (cfg.ortho == OrthoMode::PerIteration) federated_gram_schmidt(g_blocks, t);
        if (trace) {
            trace->h.push_back(h);
            trace->g.push_back(stack_right_blocks(g_blocks));
        }
        h_prev = h;
        iterations = i;
        if (done) break;
    }

    if (cfg.ortho != OrthoMode::PerIteration) federated_gram_schmidt(g_blocks, t);

    t.broadcast(make_message(MessageKind::Terminate, kAggregatorId, Matrix()));
    for (std::size_t s = 0; s < sites; ++s)
        t.receive_broadcast(static_cast<std::uint32_t>(s));

    FederatedResult out;
    out.g_blocks = std::move(g_blocks);
    out.h = std::move(h);
    out.iterations = iterations;
    out.converged = done;
    return out;
}

}  // namespace fsvd
