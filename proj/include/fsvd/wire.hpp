#pragma once

#include <cstdint>
#include <cstring>
#include <limits>
#include <string>

#include "fsvd/errors.hpp"
#include "fsvd/io.hpp"
#include "fsvd/message.hpp"

namespace fsvd {

// Framed message encoding for running the protocol across processes:
//
//   offset  size  field
//   0       4     magic "FSVP"
//   4       2     version (u16 LE) = 1
//   6       1     kind code (see MessageKind)
//   7       4     sender (u32 LE)
//   11      8     round (u64 LE)
//   19      4     payload rows (u32 LE)
//   23      4     payload cols (u32 LE)
//   27      8*r*c payload, float64 LE, row-major
//
// decode() is total: any byte string either yields a message equal to what
// encode() produced or raises one of the structured codec errors. It never
// reads past the buffer and never aborts, whatever the input.

inline constexpr char kEnvelopeMagic[4] = {'F', 'S', 'V', 'P'};
inline constexpr std::uint16_t kEnvelopeVersion = 1;
inline constexpr std::size_t kEnvelopeHeaderSize = 27;

inline std::string encode(const Message& m) {
    if (m.payload.rows() > std::numeric_limits<std::uint32_t>::max() ||
        m.payload.cols() > std::numeric_limits<std::uint32_t>::max())
        throw CodecError("payload dimensions exceed the wire format's u32 fields");
    std::string out;
    out.reserve(kEnvelopeHeaderSize + m.payload.size() * 8);
    out.append(kEnvelopeMagic, 4);
    detail::put_u16(out, kEnvelopeVersion);
    out.push_back(static_cast<char>(m.kind));
    detail::put_u32(out, m.sender);
    detail::put_u64(out, m.round);
    detail::put_u32(out, static_cast<std::uint32_t>(m.payload.rows()));
    detail::put_u32(out, static_cast<std::uint32_t>(m.payload.cols()));
    for (double v : m.payload.data()) detail::put_f64(out, v);
    return out;
}

inline Message decode(const unsigned char* data, std::size_t size) {
    detail::ByteReader r(data, size);
    unsigned char magic[4];
    r.read_bytes(magic, 4);
    if (std::memcmp(magic, kEnvelopeMagic, 4) != 0)
        throw BadMagic("envelope magic mismatch");
    const std::uint16_t version = r.read_u16();
    if (version != kEnvelopeVersion)
        throw UnsupportedVersion("envelope version " + std::to_string(version));
    unsigned char kind_code = 0;
    r.read_bytes(&kind_code, 1);
    if (kind_code > kMaxMessageKind)
        throw UnknownKind("kind code " + std::to_string(kind_code));

    Message m;
    m.kind = static_cast<MessageKind>(kind_code);
    m.sender = r.read_u32();
    m.round = r.read_u64();
    const std::uint64_t rows = r.read_u32();
    const std::uint64_t cols = r.read_u32();
    const std::uint64_t count = rows * cols;  // fits in u64: both factors are u32
    const std::uint64_t avail = r.remaining();
    if (avail % 8 != 0 || avail / 8 != count)
        throw TruncatedPayload("payload holds " + std::to_string(avail) +
                               " bytes, header declares " + std::to_string(count) + " values");
    Matrix payload(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::uint64_t i = 0; i < count; ++i) payload.data()[i] = r.read_f64();
    m.payload = std::move(payload);
    return m;
}

inline Message decode(const std::string& bytes) {
    return decode(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
}

}  // namespace fsvd
