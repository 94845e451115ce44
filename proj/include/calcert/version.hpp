#pragma once

namespace calcert {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace calcert
