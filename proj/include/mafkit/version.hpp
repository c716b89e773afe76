#pragma once

namespace mafkit {

inline constexpr const char* version = "0.1.0";

} // namespace mafkit
