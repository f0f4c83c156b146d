#pragma once

namespace bonsai {
inline constexpr const char* kVersion = "0.1.0";
}
