#pragma once

namespace gwb {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gwb
