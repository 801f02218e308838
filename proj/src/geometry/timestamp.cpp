#include "slambench/geometry/timestamp.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>

#include "slambench/error.hpp"

namespace slambench::geometry {

Timestamp parse_decimal_seconds(const std::string& text) {
  const auto bad = [&] { return Error(Errc::InvalidArgument, "not a decimal timestamp: '" + text + "'"); };
  if (text.empty()) throw bad();

  const auto dot = text.find('.');
  const std::string whole = text.substr(0, dot);
  const std::string frac = dot == std::string::npos ? std::string{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) throw bad();

  std::uint64_t seconds = 0;
  if (!whole.empty()) {
    const auto [ptr, ec] = std::from_chars(whole.data(), whole.data() + whole.size(), seconds);
    if (ec != std::errc{} || ptr != whole.data() + whole.size() || seconds > 0xffffffffull) throw bad();
  }
  std::uint32_t nanos = 0;
  std::uint32_t scale = Timestamp::kNanosPerSecond / 10;
  for (char c : frac) {
    if (!std::isdigit(static_cast<unsigned char>(c))) throw bad();
    nanos += static_cast<std::uint32_t>(c - '0') * scale;
    scale /= 10;
  }
  return Timestamp{static_cast<std::uint32_t>(seconds), nanos};
}

std::string to_string(Timestamp t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%u.%09u", t.seconds, t.nanoseconds);
  return buf;
}

}  // namespace slambench::geometry
