#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>
#include <system_error>
#include <vector>

#include "fsvd/errors.hpp"
#include "fsvd/matrix.hpp"

namespace fsvd {

// ---------------------------------------------------------------------------
// CSV: comma separator, '.' decimal point, UTF-8, optional single header row.
// Numbers are parsed and printed with std::charconv, so reading is
// locale-independent and writing emits the shortest text that round-trips
// the exact float64 value.
// ---------------------------------------------------------------------------

namespace detail {

inline double parse_field(const std::string& field, std::size_t line_no) {
    const char* first = field.data();
    const char* last = field.data() + field.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value))
        throw ParseError("line " + std::to_string(line_no) + ": cannot parse '" + field +
                             "' as a finite number",
                         line_no);
    return value;
}

inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace detail

inline Matrix load_csv(const std::string& path, bool skip_header = false) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");

    std::vector<double> data;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = skip_header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        std::size_t field_count = 0;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string field =
                line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
            data.push_back(detail::parse_field(field, line_no));
            ++field_count;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (rows == 0) {
            cols = field_count;
        } else if (field_count != cols) {
            throw InconsistentRowLength("line " + std::to_string(line_no) + ": expected " +
                                            std::to_string(cols) + " fields, found " +
                                            std::to_string(field_count),
                                        line_no);
        }
        ++rows;
    }
    if (rows == 0) throw ParseError("'" + path + "' contains no data rows", line_no);
    return Matrix(rows, cols, std::move(data));
}

inline void save_csv(const Matrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) out << ',';
            out << detail::format_double(m(i, j));
        }
        out << '\n';
    }
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// Binary matrix format, bit-exact and endian-pinned:
//   magic "FSVD" | u16 version = 1 | u64 rows | u64 cols | rows*cols f64
// all integers and floats little-endian, payload row-major.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xFF));
    out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline void put_f64(std::string& out, double d) {
    put_u64(out, std::bit_cast<std::uint64_t>(d));
}

class ByteReader {
public:
    ByteReader(const unsigned char* data, std::size_t size) : data_(data), size_(size) {}

    std::size_t remaining() const { return size_ - pos_; }

    void read_bytes(unsigned char* out, std::size_t count) {
        if (remaining() < count)
            throw TruncatedPayload("input ends after " + std::to_string(size_) +
                                   " bytes, needed " + std::to_string(pos_ + count));
        std::memcpy(out, data_ + pos_, count);
        pos_ += count;
    }

    std::uint16_t read_u16() {
        unsigned char b[2];
        read_bytes(b, 2);
        return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
    }

    std::uint32_t read_u32() {
        unsigned char b[4];
        read_bytes(b, 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    }

    std::uint64_t read_u64() {
        unsigned char b[8];
        read_bytes(b, 8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
        return v;
    }

    double read_f64() { return std::bit_cast<double>(read_u64()); }

private:
    const unsigned char* data_;
    std::size_t size_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline constexpr char kMatrixMagic[4] = {'F', 'S', 'V', 'D'};
inline constexpr std::uint16_t kMatrixFormatVersion = 1;

inline std::string encode_matrix(const Matrix& m) {
    std::string out;
    out.reserve(22 + m.size() * 8);
    out.append(kMatrixMagic, 4);
    detail::put_u16(out, kMatrixFormatVersion);
    detail::put_u64(out, m.rows());
    detail::put_u64(out, m.cols());
    for (double v : m.data()) detail::put_f64(out, v);
    return out;
}

inline Matrix decode_matrix(const unsigned char* data, std::size_t size) {
    detail::ByteReader r(data, size);
    unsigned char magic[4];
    r.read_bytes(magic, 4);
    if (std::memcmp(magic, kMatrixMagic, 4) != 0)
        throw BadMagic("matrix header magic mismatch");
    const std::uint16_t version = r.read_u16();
    if (version != kMatrixFormatVersion)
        throw UnsupportedVersion("matrix format version " + std::to_string(version));
    const std::uint64_t rows = r.read_u64();
    const std::uint64_t cols = r.read_u64();
    if (cols != 0 && rows > (std::numeric_limits<std::uint64_t>::max() / 8) / cols)
        throw TruncatedPayload("declared matrix size overflows");
    const std::uint64_t count = rows * cols;
    if (r.remaining() != count * 8)
        throw TruncatedPayload("payload holds " + std::to_string(r.remaining() / 8) +
                               " values, header declares " + std::to_string(count));
    // Bypasses the validating constructor: this layer is bit-faithful and
    // must round-trip any float64 pattern unchanged.
    Matrix out(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
    for (std::uint64_t i = 0; i < count; ++i) out.data()[i] = r.read_f64();
    return out;
}

inline void save_matrix(const Matrix& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path + "' for writing");
    const std::string bytes = encode_matrix(m);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ConfigError("write to '" + path + "' failed");
}

inline Matrix load_matrix(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "' for reading");
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_matrix(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
}

}  // namespace fsvd
