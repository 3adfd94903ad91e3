#pragma once

namespace vne {

inline constexpr const char* kToolVersion = "0.1.0";

}
