#include "slambench/metrics/probes.hpp"

#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "slambench/error.hpp"

extern "C" long long sb_alloc_net_bytes() __attribute__((weak));

namespace slambench::metrics {

std::string_view memory_probe_name(MemoryProbeKind k) noexcept {
  return k == MemoryProbeKind::AllocationHook ? "alloc" : "rss";
}

MemoryProbeKind parse_memory_probe(std::string_view name) {
  if (name == "alloc") return MemoryProbeKind::AllocationHook;
  if (name == "rss") return MemoryProbeKind::ResidentSet;
  throw Error(Errc::InvalidArgument, "unknown memory probe '" + std::string(name) + "' (expected alloc or rss)");
}

bool allocation_hook_available() noexcept { return &sb_alloc_net_bytes != nullptr; }

std::int64_t allocation_hook_net_bytes() {
  if (!allocation_hook_available())
    throw Error(Errc::ProbeUnavailable, "allocator interposer not linked into this executable");
  return sb_alloc_net_bytes();
}

std::int64_t resident_set_bytes() {
  std::ifstream statm("/proc/self/statm");
  long long size = 0, resident = 0;
  if (!(statm >> size >> resident)) throw Error(Errc::ProbeUnavailable, "cannot read /proc/self/statm");
  return resident * static_cast<std::int64_t>(sysconf(_SC_PAGESIZE));
}

AllocationHookProbe::AllocationHookProbe() : baseline_(allocation_hook_net_bytes()) {}

std::unique_ptr<MemoryProbe> make_memory_probe(MemoryProbeKind requested, std::string* fallback_note) {
  if (requested == MemoryProbeKind::AllocationHook) {
    try {
      return std::make_unique<AllocationHookProbe>();
    } catch (const Error& e) {
      if (fallback_note) *fallback_note = std::string("allocation hook unavailable, using resident set: ") + e.what();
    }
  }
  return std::make_unique<ResidentSetProbe>();
}

FileTracePowerProbe::FileTracePowerProbe(const std::filesystem::path& trace) {
  std::ifstream in(trace);
  if (!in) throw Error(Errc::ProbeUnavailable, "cannot read power trace " + trace.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    std::istringstream fields(line);
    double t, w;
    if (!(fields >> t >> w))
      throw Error(Errc::UnparseableLine, trace.string() + ":" + std::to_string(line_no) + ": expected <seconds> <watts>");
    if (!trace_.empty() && t < trace_.back().first)
      throw Error(Errc::UnsortedFrames, trace.string() + ":" + std::to_string(line_no) + ": power trace not sorted");
    trace_.emplace_back(t, w);
  }
  if (trace_.empty()) throw Error(Errc::ProbeUnavailable, "power trace " + trace.string() + " is empty");
}

FileTracePowerProbe::FileTracePowerProbe(std::vector<std::pair<double, double>> samples) : trace_(std::move(samples)) {
  if (trace_.empty()) throw Error(Errc::ProbeUnavailable, "power trace is empty");
  if (!std::is_sorted(trace_.begin(), trace_.end(), [](const auto& a, const auto& b) { return a.first < b.first; }))
    throw Error(Errc::UnsortedFrames, "power trace not sorted");
}

std::optional<double> FileTracePowerProbe::sample(double seconds) const {
  if (seconds <= trace_.front().first) return trace_.front().second;
  if (seconds >= trace_.back().first) return trace_.back().second;
  const auto hi = std::upper_bound(trace_.begin(), trace_.end(), seconds,
                                   [](double t, const auto& s) { return t < s.first; });
  const auto lo = hi - 1;
  const double span = hi->first - lo->first;
  if (span <= 0.0) return lo->second;
  const double a = (seconds - lo->first) / span;
  return lo->second + a * (hi->second - lo->second);
}

}  // namespace slambench::metrics
