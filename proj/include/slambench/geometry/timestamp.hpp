#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace slambench::geometry {

// Frame capture time. Ordered lexicographically by (seconds, nanoseconds).
struct Timestamp {
  std::uint32_t seconds = 0;
  std::uint32_t nanoseconds = 0;

  static constexpr std::uint32_t kNanosPerSecond = 1'000'000'000u;

  constexpr bool valid() const noexcept { return nanoseconds < kNanosPerSecond; }

  constexpr std::uint64_t total_nanoseconds() const noexcept {
    return std::uint64_t{seconds} * kNanosPerSecond + nanoseconds;
  }

  constexpr double to_seconds() const noexcept {
    return static_cast<double>(seconds) + static_cast<double>(nanoseconds) * 1e-9;
  }

  static constexpr Timestamp from_nanoseconds(std::uint64_t ns) noexcept {
    return Timestamp{static_cast<std::uint32_t>(ns / kNanosPerSecond),
                     static_cast<std::uint32_t>(ns % kNanosPerSecond)};
  }

  friend constexpr auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// Signed difference a - b in nanoseconds.
constexpr std::int64_t difference_ns(Timestamp a, Timestamp b) noexcept {
  return static_cast<std::int64_t>(a.total_nanoseconds()) -
         static_cast<std::int64_t>(b.total_nanoseconds());
}

constexpr double difference_seconds(Timestamp a, Timestamp b) noexcept {
  return static_cast<double>(difference_ns(a, b)) * 1e-9;
}

// Throws InvalidArgument when the string is not a non-negative decimal number of seconds.
// Digits past the ninth fractional digit are truncated.
Timestamp parse_decimal_seconds(const std::string& text);

std::string to_string(Timestamp t);

}  // namespace slambench::geometry
