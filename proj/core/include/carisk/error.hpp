#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace carisk {

enum class ErrorKind {
    InvalidInput,
    DimensionMismatch,
    NotPositiveDefinite,
    SingularMatrix,
    SingularBlock,
    OutOfRange,
    DegenerateBenchmark,
    ZeroVolatilityPortfolio,
    DegenerateDirection,
    InvalidThreshold,
    UnsupportedPartition,
    NoConvergence,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Exception carrying a machine-readable kind so callers (the CLI in
/// particular) can map failures onto exit codes.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

/// True for the kinds that describe a well-formed but degenerate instance
/// rather than malformed input.
bool is_degenerate(ErrorKind kind) noexcept;

}  // namespace carisk
