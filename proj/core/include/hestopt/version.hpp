#pragma once

namespace hestopt {

inline constexpr const char* kVersion = "0.1.0";

} // namespace hestopt
