#pragma once

namespace segeval {

inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace segeval
