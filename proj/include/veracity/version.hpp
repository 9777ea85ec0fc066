#pragma once

namespace veracity {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace veracity
