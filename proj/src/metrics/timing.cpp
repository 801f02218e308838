#include "slambench/metrics/timing.hpp"

#include <chrono>

namespace slambench::metrics {

ProcessTiming time_process(loader::AlgorithmHandle& handle) {
  const auto start = std::chrono::steady_clock::now();
  const bool ok = handle.process_once();
  const auto stop = std::chrono::steady_clock::now();
  return {ok, std::chrono::duration<double>(stop - start).count()};
}

PhaseCounts timing_update_counts(const loader::AlgorithmConfig& config) {
  PhaseCounts counts;
  for (const auto* ch : config.outputs_of_kind(loader::OutputKind::TimingPhase)) counts.emplace(ch->name, ch->updates);
  return counts;
}

std::map<std::string, double> phase_breakdown(const loader::AlgorithmConfig& config, const PhaseCounts& before) {
  std::map<std::string, double> phases;
  for (const auto* ch : config.outputs_of_kind(loader::OutputKind::TimingPhase)) {
    const auto it = before.find(ch->name);
    const std::uint64_t prior = it == before.end() ? 0 : it->second;
    if (ch->updates > prior)
      if (const double* s = std::get_if<double>(&ch->value)) phases.emplace(ch->name, *s);
  }
  return phases;
}

}  // namespace slambench::metrics
