#pragma once

namespace sbdc {

inline constexpr const char* version = "0.1.0";

}
