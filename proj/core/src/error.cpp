#include "carisk/error.hpp"

namespace carisk {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::InvalidInput: return "InvalidInput";
        case ErrorKind::DimensionMismatch: return "DimensionMismatch";
        case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
        case ErrorKind::SingularMatrix: return "SingularMatrix";
        case ErrorKind::SingularBlock: return "SingularBlock";
        case ErrorKind::OutOfRange: return "OutOfRange";
        case ErrorKind::DegenerateBenchmark: return "DegenerateBenchmark";
        case ErrorKind::ZeroVolatilityPortfolio: return "ZeroVolatilityPortfolio";
        case ErrorKind::DegenerateDirection: return "DegenerateDirection";
        case ErrorKind::InvalidThreshold: return "InvalidThreshold";
        case ErrorKind::UnsupportedPartition: return "UnsupportedPartition";
        case ErrorKind::NoConvergence: return "NoConvergence";
    }
    return "Unknown";
}

bool is_degenerate(ErrorKind kind) noexcept {
    return kind == ErrorKind::DegenerateDirection || kind == ErrorKind::DegenerateBenchmark ||
           kind == ErrorKind::ZeroVolatilityPortfolio;
}

}  // namespace carisk
