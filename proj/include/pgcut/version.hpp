#pragma once

namespace pgcut {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pgcut
