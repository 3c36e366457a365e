#pragma once

#include <cstdint>
#include <string>

#include "fsvd/errors.hpp"

namespace fsvd {

enum class Algorithm { RiFull, AiOnly, AiFull, Randomized };

enum class OrthoMode { None, FinalOnly, PerIteration };

inline const char* algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::RiFull: return "RI-FULL";
        case Algorithm::AiOnly: return "AI-ONLY";
        case Algorithm::AiFull: return "AI-FULL";
        case Algorithm::Randomized: return "RANDOMIZED";
    }
    return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
    if (s == "RI-FULL") return Algorithm::RiFull;
    if (s == "AI-ONLY") return Algorithm::AiOnly;
    if (s == "AI-FULL") return Algorithm::AiFull;
    if (s == "RANDOMIZED") return Algorithm::Randomized;
    throw ConfigError("unknown algorithm '" + s + "'");
}

inline const char* ortho_mode_name(OrthoMode m) {
    switch (m) {
        case OrthoMode::None: return "none";
        case OrthoMode::FinalOnly: return "final-only";
        case OrthoMode::PerIteration: return "per-iteration";
    }
    return "?";
}

inline OrthoMode parse_ortho_mode(const std::string& s) {
    if (s == "none") return OrthoMode::None;
    if (s == "final-only") return OrthoMode::FinalOnly;
    if (s == "per-iteration") return OrthoMode::PerIteration;
    throw ConfigError("unknown ortho mode '" + s + "'");
}

struct CostParams {
    std::uint64_t iterations = 0;  // executed loop iterations; i_prime for RANDOMIZED
    std::uint64_t sites = 0;
    std::uint64_t k = 0;
    std::uint64_t m = 0;
    std::uint64_t c = 2;
    std::uint64_t i_prime = 10;
};

// One federated Gram-Schmidt over k vectors moves S*k*(k+1)/2 scalars up and
// the same number back down.
inline std::uint64_t federated_gs_float_cost(std::uint64_t sites, std::uint64_t k) {
    return sites * k * (k + 1);
}

// Exact float counts for a full run, matching the ledger of the loopback
// simulation value for value. Derivation, with gs = S*k*(k+1):
//
//   iteration loop      2*S*m*k per iteration (S partial uploads + S-way
//                       broadcast), plus gs per iteration under
//                       per-iteration orthonormalization
//   approximate init    S*c*k*m up (local subspaces) + S*m*k down
//   randomized tail     S*(k*I')^2 up (proxy covariances) + S*(k*I')*k down
//                       (proxy eigenvectors) + gs + 2*S*m*k (final H)
//   final ortho         gs, except when per-iteration mode already
//                       orthonormalized during the last loop pass
//
// Terminate broadcasts carry zero floats and do not appear here.
inline std::uint64_t predicted_float_cost(Algorithm alg, OrthoMode mode, const CostParams& p) {
    const std::uint64_t gs = federated_gs_float_cost(p.sites, p.k);
    const std::uint64_t loop_floats =
        p.iterations * (2 * p.sites * p.m * p.k + (mode == OrthoMode::PerIteration ? gs : 0));
    const std::uint64_t init_gs = (mode == OrthoMode::PerIteration) ? gs : 0;
    const std::uint64_t final_gs = (mode == OrthoMode::PerIteration) ? 0 : gs;
    const std::uint64_t approx_init = p.sites * p.c * p.k * p.m + p.sites * p.m * p.k;

    switch (alg) {
        case Algorithm::RiFull:
            return init_gs + loop_floats + final_gs;
        case Algorithm::AiFull:
            // the approximate G0 is deliberately not orthonormalized
            return approx_init + loop_floats + final_gs;
        case Algorithm::AiOnly:
            return approx_init;
        case Algorithm::Randomized: {
            const std::uint64_t ki = p.k * p.i_prime;
            return 2 * p.sites * p.m * p.k * p.i_prime  // warm-up, no orthonormalization of G
                   + p.sites * ki * ki                  // proxy covariances up
                   + p.sites * ki * p.k                 // proxy eigenvectors down
                   + gs                                 // orthonormalize proxy-derived G
                   + 2 * p.sites * p.m * p.k;           // final H exchange
        }
    }
    throw ConfigError("predicted_float_cost: unknown algorithm");
}

}  // namespace fsvd
