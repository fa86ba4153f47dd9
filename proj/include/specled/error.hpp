#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specled {

enum class ErrorCode {
    GridMismatch,
    NonFinite,
    DegenerateColor,
    EmptyOverlap,
    WeightOutOfBounds,
    LengthMismatch,
    BadRange,
    InvalidArgument,
    DegenerateProblem,
    TooLarge,
    ParseError,
    SchemaError,
    GridError,
    RangeError,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::GridMismatch: return "grid_mismatch";
    case ErrorCode::NonFinite: return "non_finite";
    case ErrorCode::DegenerateColor: return "degenerate_color";
    case ErrorCode::EmptyOverlap: return "empty_overlap";
    case ErrorCode::WeightOutOfBounds: return "weight_out_of_bounds";
    case ErrorCode::LengthMismatch: return "length_mismatch";
    case ErrorCode::BadRange: return "bad_range";
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DegenerateProblem: return "degenerate_problem";
    case ErrorCode::TooLarge: return "too_large";
    case ErrorCode::ParseError: return "parse_error";
    case ErrorCode::SchemaError: return "schema_error";
    case ErrorCode::GridError: return "grid_error";
    case ErrorCode::RangeError: return "range_error";
    case ErrorCode::IoError: return "io_error";
    }
    return "unknown";
}

// All library failures are reported through this one exception type; the
// code identifies the failure class, the message carries context.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace specled
