#pragma once

namespace rwre {

inline constexpr const char* version = "0.1.0";

}  // namespace rwre
