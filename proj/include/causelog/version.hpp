#pragma once

namespace causelog {

inline constexpr const char* kToolVersion = "causelog 0.1.0";

} // namespace causelog
