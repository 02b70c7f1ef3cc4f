#pragma once

namespace fpph {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace fpph
