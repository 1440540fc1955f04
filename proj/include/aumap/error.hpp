#pragma once

#include <stdexcept>
#include <string>

namespace aumap {

enum class ErrorCode {
    dimension_mismatch,
    count_mismatch,
    non_finite_value,
    empty_embedding,
    empty_input,
    k_too_large,
    file_not_found,
    parse_error,
    degenerate_oracle,
    unsupported_dimensionality,
    invalid_config,
    bind_failure,
    internal,
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::dimension_mismatch: return "dimension_mismatch";
        case ErrorCode::count_mismatch: return "count_mismatch";
        case ErrorCode::non_finite_value: return "non_finite_value";
        case ErrorCode::empty_embedding: return "empty_embedding";
        case ErrorCode::empty_input: return "empty_input";
        case ErrorCode::k_too_large: return "k_too_large";
        case ErrorCode::file_not_found: return "file_not_found";
        case ErrorCode::parse_error: return "parse_error";
        case ErrorCode::degenerate_oracle: return "degenerate_oracle";
        case ErrorCode::unsupported_dimensionality: return "unsupported_dimensionality";
        case ErrorCode::invalid_config: return "invalid_config";
        case ErrorCode::bind_failure: return "bind_failure";
        case ErrorCode::internal: return "internal";
    }
    return "internal";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void raise(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace aumap
