#pragma once

namespace spectral_drop {
inline constexpr const char* kVersion = "0.1.0";
}
