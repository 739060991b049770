#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace jitchrono {

enum class ErrorCode {
    EmptyInput,
    SchemaMismatch,
    MalformedRow,
    DuplicateId,
    DegenerateInput,
    SingleClass,
    InsufficientClass,
    DimensionMismatch,
    NoOob,
    InvalidArgument,
    DomainError,
    Io,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every recoverable failure in the library is reported through this type.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    /// Errors caused by the input data rather than by how the library was called.
    bool is_data_error() const noexcept {
        switch (code_) {
        case ErrorCode::EmptyInput:
        case ErrorCode::SchemaMismatch:
        case ErrorCode::MalformedRow:
        case ErrorCode::DuplicateId:
        case ErrorCode::SingleClass:
        case ErrorCode::InsufficientClass:
        case ErrorCode::Io:
            return true;
        default:
            return false;
        }
    }

private:
    ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::MalformedRow: return "MalformedRow";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::InsufficientClass: return "InsufficientClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoOob: return "NoOob";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace jitchrono
