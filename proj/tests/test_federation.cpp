#include <catch2/catch_amalgamated.hpp>

#include <fsvd/approx_init.hpp>
#include <fsvd/federation.hpp>
#include <fsvd/gram_schmidt.hpp>
#include <fsvd/metrics.hpp>
#include <fsvd/partition.hpp>
#include <fsvd/randomized.hpp>
#include <fsvd/reference_svd.hpp>
#include <fsvd/rng.hpp>
#include <fsvd/subspace_iteration.hpp>
#include <fsvd/transport.hpp>

#include "helpers.hpp"

using fsvd::LoopbackTransport;
using fsvd::Matrix;

namespace {

Matrix stack_rows(const std::vector<Matrix>& blocks) {
    Matrix out = blocks.front();
    for (std::size_t i = 1; i < blocks.size(); ++i) out = fsvd::vstack(out, blocks[i]);
    return out;
}

}  // namespace

// --- distributed orthonormalization ---------------------------------------------

TEST_CASE("single-site distributed orthonormalization is the centralized routine") {
    const Matrix v = testutil::random_matrix(10, 4, 50);
    const auto central = fsvd::gram_schmidt(v);

    std::vector<Matrix> blocks{v};
    LoopbackTransport t(1);
    const auto fed = fsvd::federated_gram_schmidt(blocks, t);

    REQUIRE(blocks[0].bit_equal(central.q));
    REQUIRE(fed.norms == central.norms);
}

TEST_CASE("multi-site orthonormalization matches the centralized result") {
    const Matrix v = testutil::random_matrix(12, 4, 51);
    auto blocks = testutil::split_rows(v, {5, 4, 3});
    LoopbackTransport t(3);
    const auto fed = fsvd::federated_gram_schmidt(blocks, t);

    const auto central = fsvd::gram_schmidt(v);
    REQUIRE(fsvd::max_abs_diff(stack_rows(blocks), central.q) <= 1e-12);
    REQUIRE(fed.norms.size() == central.norms.size());
    for (std::size_t i = 0; i < fed.norms.size(); ++i)
        REQUIRE(fed.norms[i] == Catch::Approx(central.norms[i]).epsilon(1e-12));
    REQUIRE(testutil::orthonormality_error(stack_rows(blocks)) <= 1e-12);
}

TEST_CASE("distributed orthonormalization moves only scalar traffic") {
    const std::size_t sites = 3, k = 4;
    auto blocks = testutil::split_rows(testutil::random_matrix(12, k, 52), {5, 4, 3});
    LoopbackTransport t(sites);
    (void)fsvd::federated_gram_schmidt(blocks, t);

    const auto& ledger = t.ledger();
    REQUIRE(ledger.messages_client_to_agg == sites * (2 * k - 1));
    REQUIRE(ledger.messages_agg_to_clients == sites * (2 * k - 1));
    REQUIRE(ledger.rounds == 2 * k - 1);
    REQUIRE(ledger.floats_client_to_agg == sites * k * (k + 1) / 2);
    REQUIRE(ledger.floats_agg_to_clients == sites * k * (k + 1) / 2);
    REQUIRE(ledger.floats_total() == fsvd::federated_gs_float_cost(sites, k));
}

TEST_CASE("distributed orthonormalization reports rank loss at the same column") {
    Matrix v = testutil::random_matrix(10, 4, 53);
    for (std::size_t i = 0; i < v.rows(); ++i) v(i, 2) = v(i, 0) + v(i, 1);

    std::size_t central_col = 99;
    try {
        (void)fsvd::gram_schmidt(v);
    } catch (const fsvd::RankDeficient& e) {
        central_col = e.column;
    }
    REQUIRE(central_col == 2);

    auto blocks = testutil::split_rows(v, {6, 4});
    LoopbackTransport t(2);
    try {
        (void)fsvd::federated_gram_schmidt(blocks, t);
        FAIL("expected RankDeficient");
    } catch (const fsvd::RankDeficient& e) {
        REQUIRE(e.column == central_col);
    }
}

// --- federated subspace iteration -------------------------------------------------

TEST_CASE("single-site federated run reproduces the centralized iteration bit for bit") {
    const Matrix a = fsvd::gaussian_matrix(14, 11, 54);
    const auto part = fsvd::split_columns(a, std::size_t{1});

    fsvd::IterationTrace central_trace;
    const auto central = fsvd::vertical_subspace_iteration(a, 3, {}, 9, &central_trace);

    fsvd::ProtocolConfig cfg;
    cfg.k = 3;
    cfg.ortho = fsvd::OrthoMode::PerIteration;
    cfg.seed = 9;
    LoopbackTransport t(1);
    fsvd::FederatedTrace fed_trace;
    const auto fed = fsvd::federated_subspace_iteration(part, cfg, t, &fed_trace);

    REQUIRE(fed.iterations == central.iterations);
    REQUIRE(fed.converged == central.converged);
    REQUIRE(fed_trace.h.size() == central_trace.h.size());
    for (std::size_t i = 0; i < fed_trace.h.size(); ++i) {
        REQUIRE(fed_trace.h[i].bit_equal(central_trace.h[i]));
        REQUIRE(fed_trace.g[i].bit_equal(central_trace.g[i]));
    }
    REQUIRE(fed.h.bit_equal(central_trace.h.back()));
    REQUIRE(stack_rows(fed.g_blocks).bit_equal(central_trace.g.back()));
}

TEST_CASE("multi-site trajectories track the centralized ones") {
    const Matrix a = fsvd::gaussian_matrix(20, 15, 42);
    const auto part = fsvd::split_columns(a, std::size_t{3});

    fsvd::IterationTrace central_trace;
    const auto central = fsvd::vertical_subspace_iteration(a, 5, {}, 7, &central_trace);

    fsvd::ProtocolConfig cfg;
    cfg.k = 5;
    cfg.ortho = fsvd::OrthoMode::PerIteration;
    cfg.seed = 7;
    LoopbackTransport t(3);
    fsvd::FederatedTrace fed_trace;
    const auto fed = fsvd::federated_subspace_iteration(part, cfg, t, &fed_trace);

    REQUIRE(fed.iterations == central.iterations);
    REQUIRE(fed.converged);
    for (std::size_t i = 0; i < fed_trace.h.size(); ++i) {
        REQUIRE(fsvd::max_abs_diff(fed_trace.h[i], central_trace.h[i]) <= 1e-9);
        REQUIRE(fsvd::max_abs_diff(fed_trace.g[i], central_trace.g[i]) <= 1e-9);
    }
}

TEST_CASE("deferred orthonormalization modes are the same computation") {
    const Matrix a = fsvd::gaussian_matrix(16, 12, 55);
    const auto part = fsvd::split_columns(a, std::size_t{2});

    fsvd::ProtocolConfig cfg;
    cfg.k = 3;
    cfg.seed = 4;

    cfg.ortho = fsvd::OrthoMode::FinalOnly;
    LoopbackTransport t1(2);
    const auto final_only = fsvd::federated_subspace_iteration(part, cfg, t1);

    cfg.ortho = fsvd::OrthoMode::None;
    LoopbackTransport t2(2);
    const auto none = fsvd::federated_subspace_iteration(part, cfg, t2);

    REQUIRE(none.h.bit_equal(final_only.h));
    REQUIRE(none.iterations == final_only.iterations);
    for (std::size_t s = 0; s < 2; ++s)
        REQUIRE(none.g_blocks[s].bit_equal(final_only.g_blocks[s]));
    REQUIRE(t1.ledger().floats_total() == t2.ledger().floats_total());
    REQUIRE(t1.ledger().rounds == t2.ledger().rounds);

    // the closing orthonormalization still happened
    REQUIRE(testutil::orthonormality_error(stack_rows(final_only.g_blocks)) <= 1e-10);
    REQUIRE(testutil::orthonormality_error(final_only.h) <= 1e-10);
}

TEST_CASE("the result does not depend on how columns are spread over sites") {
    fsvd::SyntheticSpec spec;
    spec.feature_count = 24;
    spec.sample_count = 20;
    spec.spectrum = testutil::geometric_spectrum(8, 12.0, 0.7);
    spec.seed = 13;
    const Matrix a = fsvd::generate_synthetic(spec);

    fsvd::ProtocolConfig cfg;
    cfg.k = 4;
    cfg.seed = 21;

    std::vector<Matrix> hs, gs;
    for (std::size_t sites : {1u, 2u, 5u}) {
        LoopbackTransport t(sites);
        auto r = fsvd::federated_subspace_iteration(fsvd::split_columns(a, sites), cfg, t);
        REQUIRE(r.converged);
        Matrix g = stack_rows(r.g_blocks);
        fsvd::sign_normalize_pair(r.h, g);
        hs.push_back(std::move(r.h));
        gs.push_back(std::move(g));
    }
    for (std::size_t i = 1; i < hs.size(); ++i) {
        REQUIRE(fsvd::max_abs_diff(hs[i], hs[0]) <= 1e-8);
        REQUIRE(fsvd::max_abs_diff(gs[i], gs[0]) <= 1e-8);
    }
}

TEST_CASE("repeated runs leave identical transcripts") {
    const Matrix a = fsvd::gaussian_matrix(10, 8, 56);
    const auto part = fsvd::split_columns(a, std::size_t{2});
    fsvd::ProtocolConfig cfg;
    cfg.k = 2;
    cfg.seed = 3;

    auto run = [&]() {
        fsvd::Transcript tr;
        LoopbackTransport t(2, &tr);
        (void)fsvd::federated_subspace_iteration(part, cfg, t);
        return tr;
    };
    const auto t1 = run();
    const auto t2 = run();
    REQUIRE(t1.entries.size() == t2.entries.size());
    for (std::size_t i = 0; i < t1.entries.size(); ++i) {
        REQUIRE(t1.entries[i].message.kind == t2.entries[i].message.kind);
        REQUIRE(t1.entries[i].message.sender == t2.entries[i].message.sender);
        REQUIRE(t1.entries[i].message.payload.bit_equal(t2.entries[i].message.payload));
    }
    REQUIRE(t1.entries.back().message.kind == fsvd::MessageKind::Terminate);
}

// --- approximate initialization -----------------------------------------------------

TEST_CASE("homogeneous sites make the approximate start exact") {
    fsvd::SyntheticSpec spec;
    spec.feature_count = 12;
    spec.sample_count = 8;
    spec.spectrum = {6.0, 4.0, 2.5};
    spec.seed = 14;
    const Matrix b = fsvd::generate_synthetic(spec);
    const Matrix a = fsvd::hstack(fsvd::hstack(b, b), b);
    const auto part = fsvd::split_columns(a, std::vector<double>{1, 1, 1});

    // rank 3 < c*k = 6 exercises the zero-row padding path
    const auto init = fsvd::approximate_init(part, 3, 2);
    const auto ref = fsvd::reference_svd(a, 3);
    REQUIRE(testutil::max_angle(fsvd::principal_angles(init.h, ref.h)) <= 1e-6);

    REQUIRE(init.g_blocks.size() == 3);
    for (std::size_t s = 0; s < 3; ++s)
        REQUIRE(init.g_blocks[s].bit_equal(fsvd::multiply_at_b(part.blocks[s], init.h)));
}

TEST_CASE("approximate start beats a random start and speeds up the run") {
    fsvd::SyntheticSpec spec;
    spec.feature_count = 40;
    spec.sample_count = 30;
    spec.spectrum = testutil::geometric_spectrum(10, 20.0, 0.75);
    spec.seed = 15;
    const Matrix a = fsvd::generate_synthetic(spec);
    const auto part = fsvd::split_columns(a, std::size_t{3});
    const std::size_t k = 5;

    const auto ref = fsvd::reference_svd(a, k);
    const auto init = fsvd::approximate_init(part, k, 2);
    const double approx_angle = testutil::max_angle(fsvd::principal_angles(init.h, ref.h));

    const Matrix g0 = fsvd::orthonormalize(fsvd::gaussian_matrix(30, k, 16));
    const Matrix h_rand = fsvd::orthonormalize(fsvd::multiply(a, g0));
    const double random_angle = testutil::max_angle(fsvd::principal_angles(h_rand, ref.h));
    REQUIRE(approx_angle < random_angle);

    fsvd::ProtocolConfig cfg;
    cfg.k = k;
    cfg.seed = 16;
    cfg.init = fsvd::InitMode::Random;
    LoopbackTransport t_random(3);
    const auto ri = fsvd::federated_subspace_iteration(part, cfg, t_random);

    cfg.init = fsvd::InitMode::Approximate;
    LoopbackTransport t_approx(3);
    const auto ai = fsvd::federated_subspace_iteration(part, cfg, t_approx);

    REQUIRE(ri.converged);
    REQUIRE(ai.converged);
    REQUIRE(ai.iterations <= ri.iterations);
}

TEST_CASE("approximate initialization validates its geometry") {
    const Matrix a = testutil::random_matrix(4, 6, 57);
    const auto part1 = fsvd::split_columns(a, std::size_t{1});
    REQUIRE_THROWS_AS(fsvd::approximate_init(part1, 3, 2), fsvd::ConfigError);  // c*k > m

    const Matrix b = testutil::random_matrix(12, 4, 58);
    const auto part2 = fsvd::split_columns(b, std::size_t{2});
    REQUIRE_THROWS_AS(fsvd::approximate_init(part2, 2, 2), fsvd::ConfigError);  // c*k > n_s

    REQUIRE_THROWS_AS(fsvd::approximate_init(part2, 0, 2), fsvd::ConfigError);
    REQUIRE_THROWS_AS(fsvd::approximate_init(part2, 1, 0), fsvd::ConfigError);
    REQUIRE_THROWS_AS(fsvd::approximate_init(fsvd::VerticalPartition{}, 1, 1),
                      fsvd::ConfigError);
}

TEST_CASE("approximate initialization arithmetic ignores the transport") {
    const Matrix a = testutil::random_matrix(14, 21, 59);  // 7 samples per site >= c*k
    const auto part = fsvd::split_columns(a, std::size_t{3});

    const auto silent = fsvd::approximate_init(part, 3, 2);
    LoopbackTransport t(3);
    const auto wired = fsvd::approximate_init(part, 3, 2, &t);

    REQUIRE(wired.h.bit_equal(silent.h));
    for (std::size_t s = 0; s < 3; ++s)
        REQUIRE(wired.g_blocks[s].bit_equal(silent.g_blocks[s]));

    // one subspace upload per site, one start broadcast back
    const std::size_t m = 14, k = 3, c = 2, sites = 3;
    REQUIRE(t.ledger().floats_client_to_agg == sites * c * k * m);
    REQUIRE(t.ledger().floats_agg_to_clients == sites * m * k);
    REQUIRE(t.ledger().rounds == 1);
}

// --- randomized variant -----------------------------------------------------------

TEST_CASE("randomized variant recovers the subspace through the proxy") {
    fsvd::SyntheticSpec spec;
    spec.feature_count = 30;
    spec.sample_count = 24;
    spec.spectrum = testutil::geometric_spectrum(8, 10.0, 0.6);
    spec.seed = 17;
    const Matrix a = fsvd::generate_synthetic(spec);
    const auto part = fsvd::split_columns(a, std::size_t{2});

    fsvd::ProtocolConfig cfg;
    cfg.k = 3;
    cfg.i_prime = 4;
    cfg.seed = 18;

    fsvd::Transcript tr;
    LoopbackTransport t(2, &tr);
    fsvd::FederatedTrace trace;
    const auto r = fsvd::federated_randomized_svd(part, cfg, t, &trace);

    REQUIRE(r.iterations == 4);
    REQUIRE(r.converged);
    REQUIRE(trace.h.size() == 5);  // warm-up rows plus the final exchange

    const auto ref = fsvd::reference_svd(a, 3);
    REQUIRE(testutil::max_angle(fsvd::principal_angles(r.h, ref.h)) <= 0.01);
    REQUIRE(testutil::orthonormality_error(stack_rows(r.g_blocks)) <= 1e-10);

    std::size_t proxy_uploads = 0, full_width_broadcasts = 0;
    for (const auto& e : tr.entries) {
        if (e.message.kind == fsvd::MessageKind::ProxyCov) {
            ++proxy_uploads;
            REQUIRE(e.message.payload.rows() == 12);  // k * i_prime
            REQUIRE(e.message.payload.cols() == 12);
        }
        if (!e.to_aggregator && e.message.kind == fsvd::MessageKind::GlobalH)
            ++full_width_broadcasts;
    }
    REQUIRE(proxy_uploads == 2);
    REQUIRE(full_width_broadcasts == cfg.i_prime + 1);
}

TEST_CASE("randomized variant validates input and detects rank collapse") {
    const Matrix a = testutil::random_matrix(10, 8, 60);
    const auto part = fsvd::split_columns(a, std::size_t{2});

    fsvd::ProtocolConfig cfg;
    cfg.k = 2;
    cfg.i_prime = 3;

    {
        LoopbackTransport t(3);  // transport sites must match the partition
        REQUIRE_THROWS_AS(fsvd::federated_randomized_svd(part, cfg, t), fsvd::TransportError);
    }
    {
        fsvd::ProtocolConfig bad = cfg;
        bad.i_prime = 0;
        LoopbackTransport t(2);
        REQUIRE_THROWS_AS(fsvd::federated_randomized_svd(part, bad, t), fsvd::ConfigError);
    }
    {
        fsvd::ProtocolConfig bad = cfg;
        bad.k = 0;
        LoopbackTransport t(2);
        REQUIRE_THROWS_AS(fsvd::federated_randomized_svd(part, bad, t), fsvd::ConfigError);
    }
    {
        fsvd::ProtocolConfig bad = cfg;
        bad.k = 11;
        LoopbackTransport t(2);
        REQUIRE_THROWS_AS(fsvd::federated_randomized_svd(part, bad, t), fsvd::ConfigError);
    }

    // rank-one data cannot support a two-dimensional subspace
    Matrix rank1(10, 8);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 8; ++j)
            rank1(i, j) = (1.0 + static_cast<double>(i)) * (0.5 + static_cast<double>(j));
    const auto bad_part = fsvd::split_columns(rank1, std::size_t{2});
    LoopbackTransport t(2);
    REQUIRE_THROWS_AS(fsvd::federated_randomized_svd(bad_part, cfg, t), fsvd::RankDeficient);
}
