#include <mafkit/error.hpp>

namespace mafkit {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::insufficient_data:
        return "insufficient_data";
    case ErrorCode::invalid_input:
        return "invalid_input";
    case ErrorCode::singular_matrix:
        return "singular_matrix";
    case ErrorCode::degenerate_series:
        return "degenerate_series";
    case ErrorCode::degenerate_residual:
        return "degenerate_residual";
    case ErrorCode::invalid_config:
        return "invalid_config";
    case ErrorCode::parse_error:
        return "parse_error";
    case ErrorCode::pole:
        return "pole";
    }
    return "unknown";
}

} // namespace mafkit
