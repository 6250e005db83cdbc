#pragma once

namespace tailcp {
inline constexpr const char* kVersion = "0.1.0";
}
