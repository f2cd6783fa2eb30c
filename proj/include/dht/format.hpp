#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace dht {

/// Locale-independent, platform-stable rendering used in every CSV/JSON
/// number the tools emit.
inline std::string format_double(double v, int digits = 12) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

}  // namespace dht
