#pragma once

namespace heighten {
inline constexpr const char* kVersion = "0.1.0";
}
