#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "slambench/loader/algorithm.hpp"

namespace slambench::metrics {

struct ProcessTiming {
  bool ok = false;       // sb_process_once result
  double seconds = 0.0;  // steady-clock time spent inside sb_process_once
};

ProcessTiming time_process(loader::AlgorithmHandle& handle);

using PhaseCounts = std::map<std::string, std::uint64_t, std::less<>>;

// Update counters of every TIMING_PHASE channel, taken before a frame is processed.
PhaseCounts timing_update_counts(const loader::AlgorithmConfig& config);

// Phase durations (s) published since `before` was taken. Empty when the plugin publishes none.
std::map<std::string, double> phase_breakdown(const loader::AlgorithmConfig& config, const PhaseCounts& before);

}  // namespace slambench::metrics
