#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mafkit {

enum class ErrorCode {
    insufficient_data,
    invalid_input,
    singular_matrix,
    degenerate_series,
    degenerate_residual,
    invalid_config,
    parse_error,
    pole,
};

std::string_view to_string(ErrorCode code) noexcept;

//! Every failure raised by the library. The code drives CLI exit status.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace mafkit
