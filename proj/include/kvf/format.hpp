#pragma once

#include <cstdio>
#include <string>

namespace kvf {

// Shortest-faithful decimal form: 17 significant digits round-trip every
// finite double exactly through strtod.
inline std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace kvf
