#pragma once

#include <charconv>
#include <string>

namespace pmqkd {

// Shortest decimal text that round-trips to the same double.
inline std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

}  // namespace pmqkd
