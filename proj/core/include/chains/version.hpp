#pragma once

namespace chains {

inline constexpr const char* version = "0.1.0";

}
