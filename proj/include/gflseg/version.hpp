#pragma once

namespace gflseg {
inline constexpr const char* kVersion = "0.1.0";
}
