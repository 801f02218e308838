#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace slambench::metrics {

enum class MemoryProbeKind { AllocationHook, ResidentSet };

std::string_view memory_probe_name(MemoryProbeKind k) noexcept;  // "alloc" / "rss"
MemoryProbeKind parse_memory_probe(std::string_view name);       // throws InvalidArgument

// True when the executable links the allocator interposer.
bool allocation_hook_available() noexcept;
// Net bytes currently allocated through the C allocator in this process. Throws ProbeUnavailable.
std::int64_t allocation_hook_net_bytes();
std::int64_t resident_set_bytes();

class MemoryProbe {
 public:
  virtual ~MemoryProbe() = default;
  virtual MemoryProbeKind kind() const = 0;
  // Allocation hook: net bytes allocated since the probe was created. Resident set: current RSS.
  virtual std::int64_t sample() = 0;
};

class AllocationHookProbe final : public MemoryProbe {
 public:
  AllocationHookProbe();  // throws ProbeUnavailable
  MemoryProbeKind kind() const override { return MemoryProbeKind::AllocationHook; }
  std::int64_t sample() override { return allocation_hook_net_bytes() - baseline_; }

 private:
  std::int64_t baseline_ = 0;
};

class ResidentSetProbe final : public MemoryProbe {
 public:
  MemoryProbeKind kind() const override { return MemoryProbeKind::ResidentSet; }
  std::int64_t sample() override { return resident_set_bytes(); }
};

// Returns the requested probe, or the resident-set probe when the allocation hook is missing; in
// that case `fallback_note` receives the reason.
std::unique_ptr<MemoryProbe> make_memory_probe(MemoryProbeKind requested, std::string* fallback_note = nullptr);

class PowerProbe {
 public:
  virtual ~PowerProbe() = default;
  virtual std::string_view name() const = 0;
  // Watts at `seconds` on the run clock, or nullopt when the probe measures nothing.
  virtual std::optional<double> sample(double seconds) const = 0;
};

class NonePowerProbe final : public PowerProbe {
 public:
  std::string_view name() const override { return "none"; }
  std::optional<double> sample(double) const override { return std::nullopt; }
};

// Replays `<seconds> <watts>` lines with linear interpolation, clamped to the first and last
// samples outside the trace.
class FileTracePowerProbe final : public PowerProbe {
 public:
  explicit FileTracePowerProbe(const std::filesystem::path& trace);  // throws ProbeUnavailable
  explicit FileTracePowerProbe(std::vector<std::pair<double, double>> samples);
  std::string_view name() const override { return "file"; }
  std::optional<double> sample(double seconds) const override;

 private:
  std::vector<std::pair<double, double>> trace_;
};

}  // namespace slambench::metrics
