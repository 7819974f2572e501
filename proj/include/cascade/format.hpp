#pragma once

#include <cstdio>
#include <string>

namespace cascade {

inline constexpr const char* kVersion = "1.0.0";

/// Every number the artifact prints goes through here: 12 significant digits.
inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace cascade
