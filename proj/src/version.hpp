#pragma once

namespace qha::cli {
inline constexpr const char* kVersion = "0.1.0";
}
