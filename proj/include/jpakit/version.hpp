#pragma once

namespace jpakit {
inline constexpr const char* version = "0.1.0";
}
