#pragma once

#include <cmath>
#include <cstdint>
#include <limits>

namespace cordkit {

/// Scheduler time in integer microseconds.
using Tick = std::int64_t;

inline constexpr Tick kTicksPerSecond = 1'000'000;
inline constexpr Tick kTickInfinity = std::numeric_limits<Tick>::max() / 4;

constexpr double ticks_to_seconds(Tick t) { return static_cast<double>(t) / kTicksPerSecond; }

/// Rounds a duration in seconds up to whole ticks. A tiny slack absorbs
/// floating-point noise so exact multiples are not pushed one tick late.
inline Tick seconds_to_ticks_ceil(double s) {
  const double us = s * static_cast<double>(kTicksPerSecond);
  return static_cast<Tick>(std::ceil(us - 1e-6));
}

inline Tick seconds_to_ticks_round(double s) {
  return static_cast<Tick>(std::llround(s * static_cast<double>(kTicksPerSecond)));
}

}  // namespace cordkit
