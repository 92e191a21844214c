#pragma once

namespace duoloop {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace duoloop
