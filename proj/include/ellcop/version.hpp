#pragma once

namespace ellcop {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace ellcop
