#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace argrid {

enum class ErrorCode {
    InvalidArgument,
    DimensionMismatch,
    InvalidConfig,
    EmptyInput,
    DegenerateLabels,
    NonFinite,
    BadMagic,
    UnsupportedVersion,
    Truncated,
    MaskViolation,
    Format,
    Io,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::DimensionMismatch: return "dimension_mismatch";
        case ErrorCode::InvalidConfig: return "invalid_config";
        case ErrorCode::EmptyInput: return "empty_input";
        case ErrorCode::DegenerateLabels: return "degenerate_labels";
        case ErrorCode::NonFinite: return "non_finite";
        case ErrorCode::BadMagic: return "bad_magic";
        case ErrorCode::UnsupportedVersion: return "unsupported_version";
        case ErrorCode::Truncated: return "truncated";
        case ErrorCode::MaskViolation: return "mask_violation";
        case ErrorCode::Format: return "format";
        case ErrorCode::Io: return "io";
    }
    return "unknown";
}

/// Structured error carried by every failing public operation.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& message) {
    if (!condition) throw Error(code, message);
}

} // namespace argrid
