#pragma once

#include <cstdint>
#include <string>

#include "fsvd/matrix.hpp"

namespace fsvd {

// Everything that ever crosses the star topology. Partial* kinds flow from a
// client to the aggregator, Global* and ProxyEigvecs flow back, and the
// payload shapes are fixed per kind:
//
//   PartialH / GlobalH          m x k
//   PartialNorm / GlobalNorm    1 x 1
//   PartialResiduals /
//   GlobalResiduals             j x 1  (1 <= j < k)
//   LocalSubspace               c*k x m
//   ProxyCov                    (k*i') x (k*i')
//   ProxyEigvecs                (k*i') x k
//   Terminate                   0 x 0
//
// No kind has a sample-dimension shape; that is the protocol's privacy
// boundary and the transcript scanner enforces it.
enum class MessageKind : std::uint8_t {
    PartialH = 0,
    GlobalH = 1,
    PartialNorm = 2,
    GlobalNorm = 3,
    PartialResiduals = 4,
    GlobalResiduals = 5,
    LocalSubspace = 6,
    ProxyCov = 7,
    ProxyEigvecs = 8,
    Terminate = 9,
};

inline constexpr std::uint8_t kMaxMessageKind = 9;
inline constexpr std::uint32_t kAggregatorId = 0xFFFFFFFFu;

inline const char* kind_name(MessageKind k) {
    switch (k) {
        case MessageKind::PartialH: return "PartialH";
        case MessageKind::GlobalH: return "GlobalH";
        case MessageKind::PartialNorm: return "PartialNorm";
        case MessageKind::GlobalNorm: return "GlobalNorm";
        case MessageKind::PartialResiduals: return "PartialResiduals";
        case MessageKind::GlobalResiduals: return "GlobalResiduals";
        case MessageKind::LocalSubspace: return "LocalSubspace";
        case MessageKind::ProxyCov: return "ProxyCov";
        case MessageKind::ProxyEigvecs: return "ProxyEigvecs";
        case MessageKind::Terminate: return "Terminate";
    }
    return "?";
}

struct Message {
    MessageKind kind = MessageKind::Terminate;
    std::uint32_t sender = 0;  // site id, or kAggregatorId
    std::uint64_t round = 0;   // stamped by the transport
    Matrix payload;

    std::size_t float_count() const { return payload.size(); }
};

inline Message make_message(MessageKind kind, std::uint32_t sender, Matrix payload) {
    Message m;
    m.kind = kind;
    m.sender = sender;
    m.payload = std::move(payload);
    return m;
}

inline Message scalar_message(MessageKind kind, std::uint32_t sender, double value) {
    Matrix p(1, 1);
    p(0, 0) = value;
    return make_message(kind, sender, std::move(p));
}

}  // namespace fsvd
