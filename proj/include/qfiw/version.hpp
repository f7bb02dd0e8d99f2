#pragma once

namespace qfiw {

inline constexpr const char* kVersion = "0.1.0";

} // namespace qfiw
