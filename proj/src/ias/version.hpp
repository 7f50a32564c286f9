#pragma once

namespace ias {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ias
