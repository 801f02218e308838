#pragma once

// Readers for the hand-made dataset fixtures, independent of the ingest library.

#include <cstdint>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "support/support.hpp"

namespace support {

// Minimal PNM parse for fixtures written as "P5|P6\n<w> <h>\n<maxval>\n<data>".
struct Pnm {
  std::uint32_t w = 0, h = 0, maxval = 0;
  std::vector<std::uint8_t> data;  // as stored on disk
};

inline Pnm read_fixture_pnm(const fs::path& p) {
  std::istringstream in(support::slurp(p));
  std::string magic;
  Pnm out;
  in >> magic >> out.w >> out.h >> out.maxval;
  in.get();
  out.data.assign(std::istreambuf_iterator<char>(in), {});
  return out;
}

inline std::vector<std::uint8_t> swap16(std::vector<std::uint8_t> v) {
  for (std::size_t i = 0; i + 1 < v.size(); i += 2) std::swap(v[i], v[i + 1]);
  return v;
}

// "<seconds>.<fraction>" to integer nanoseconds without going through floating point.
inline std::uint64_t decimal_ns(const std::string& s) {
  const auto dot = s.find('.');
  std::uint64_t ns = std::stoull(s.substr(0, dot)) * 1'000'000'000ull;
  if (dot != std::string::npos) {
    std::string frac = s.substr(dot + 1);
    frac.resize(9, '0');
    ns += std::stoull(frac);
  }
  return ns;
}

// (timestamp text, second column) of a TUM-style list file, skipping comments.
inline std::vector<std::pair<std::string, std::string>> read_list(const fs::path& p) {
  std::vector<std::pair<std::string, std::string>> out;
  std::istringstream in(slurp(p));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream f(line);
    std::string a, b;
    f >> a >> b;
    out.emplace_back(a, b);
  }
  return out;
}

}  // namespace support
