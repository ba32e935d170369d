#pragma once

// Tiny CSV helpers. Doubles are rendered in shortest round-trip form so a
// parse-back recovers the exact value; lines always end with LF.

#include <charconv>
#include <string>

namespace stodyn {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace stodyn
