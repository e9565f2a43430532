#pragma once

#include <string_view>

namespace evspike {

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace evspike
