#pragma once

namespace bushvac {

inline constexpr const char* kToolName = "bushvac";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace bushvac
