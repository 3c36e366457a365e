#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fsvd {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};

// Raised when an orthonormalization or decomposition meets a column whose
// residual mass falls below the rank tolerance. `column` is zero-based.
struct RankDeficient : Error {
    std::size_t column;
    RankDeficient(std::size_t column, const std::string& what)
        : Error(what), column(column) {}
};

struct ZeroColumn : Error {
    std::size_t column;
    ZeroColumn(std::size_t column, const std::string& what)
        : Error(what), column(column) {}
};

struct ZeroVariance : Error {
    using Error::Error;
};

struct NumericallySingular : Error {
    using Error::Error;
};

// Attack-side failure: the observed transcript never reached full column rank.
// `columns_used` is the number of admitted independent columns.
struct InsufficientRank : Error {
    std::size_t columns_used;
    InsufficientRank(std::size_t columns_used, const std::string& what)
        : Error(what), columns_used(columns_used) {}
};

struct TooManySites : Error {
    using Error::Error;
};

struct ParseError : Error {
    std::size_t line;  // 1-based; 0 when not line-oriented
    explicit ParseError(const std::string& what, std::size_t line = 0)
        : Error(what), line(line) {}
};

struct InconsistentRowLength : ParseError {
    using ParseError::ParseError;
};

struct CodecError : Error {
    using Error::Error;
};

struct BadMagic : CodecError {
    using CodecError::CodecError;
};

struct UnsupportedVersion : CodecError {
    using CodecError::CodecError;
};

struct TruncatedPayload : CodecError {
    using CodecError::CodecError;
};

struct UnknownKind : CodecError {
    using CodecError::CodecError;
};

struct TransportError : Error {
    using Error::Error;
};

// User-facing configuration problems (bad flags, unreadable files): CLI exit 1.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace fsvd
