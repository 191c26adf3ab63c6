#pragma once

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "swelm/errors.hpp"

namespace swelm::detail {

// Hex-float round trip: bit-exact, locale independent.
inline std::string double_to_hex(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%a", v);
  return buf;
}

inline double hex_to_double(const std::string& s) {
  const char* begin = s.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || end != begin + s.size()) {
    throw IoError("not a parsable floating point literal: '" + s + "'");
  }
  return v;
}

// Shortest decimal that round-trips; used for stream labels and other places
// where a canonical human-readable form matters.
inline std::string shortest_double(double v) {
  char buf[48];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace swelm::detail
