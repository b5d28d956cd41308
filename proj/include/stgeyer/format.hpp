#pragma once

#include <charconv>
#include <cstdint>
#include <string>

namespace stgeyer {

/// Shortest decimal string that round-trips to the same double. Locale-free,
/// so file output is identical across runs and machines.
inline std::string format_double(double v) {
  char buf[40];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

inline std::string format_int(std::int64_t v) {
  char buf[24];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

}  // namespace stgeyer
