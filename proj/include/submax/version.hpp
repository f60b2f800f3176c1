#pragma once

namespace submax {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace submax
