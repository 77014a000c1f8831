#pragma once

#include <charconv>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "mdag/error.hpp"

namespace mdag {

/// All times are integer microseconds.
using Time = std::int64_t;

using TaskId = std::int64_t;
using VertexId = std::int64_t;

constexpr Time kMicrosPerMilli = 1000;

constexpr Time ms(std::int64_t v) { return v * kMicrosPerMilli; }

/// Parses "250", "250us" or "20ms" into microseconds. Bare integers are microseconds.
inline Time parse_time(std::string_view text) {
  std::string_view digits = text;
  Time scale = 1;
  if (digits.ends_with("ms")) {
    digits.remove_suffix(2);
    scale = kMicrosPerMilli;
  } else if (digits.ends_with("us")) {
    digits.remove_suffix(2);
  }
  Time value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (digits.empty() || ec != std::errc{} || ptr != digits.data() + digits.size()) {
    throw Error(ErrorKind::Parse, "invalid time '" + std::string(text) + "'");
  }
  if (value > std::numeric_limits<Time>::max() / scale || value < 0) {
    throw Error(ErrorKind::Parse, "time out of range '" + std::string(text) + "'");
  }
  return value * scale;
}

}  // namespace mdag
