#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "slambench/runner/benchmark.hpp"

namespace slambench::runner {

// Values a swept parameter may take: an explicit list, or a numeric range. Grid search walks the
// range in `step` increments; random search draws uniformly from [min, max].
struct ParamDomain {
  std::string name;
  std::vector<std::string> values;
  std::optional<double> min, max, step;
};

enum class SweepStrategy { Grid, Random };

struct SweepSpec {
  RunSpec base;  // exactly one algorithm
  std::vector<ParamDomain> domains;
  SweepStrategy strategy = SweepStrategy::Grid;
  std::size_t samples = 10;  // random strategy only
  std::uint64_t seed = 0;
};

struct SweepSample {
  std::map<std::string, std::string> parameters;  // swept values only
  bool ok = false;
  std::string failure;
  std::optional<double> mean_duration;  // s per processed frame
  std::optional<double> ate_rmse;       // runtime ATE RMSE (m)
};

struct SweepResult {
  std::vector<SweepSample> samples;
  std::vector<std::size_t> front;  // indices into samples, ordered by mean duration
};

// Indices of the non-dominated points (both objectives minimised), stably ordered by the first
// objective. A point dominates another when it is <= in both and < in at least one.
// Throws NoValidSamples when `points` is empty.
std::vector<std::size_t> compute_pareto(std::span<const std::pair<double, double>> points);
// Same over the successful samples of a sweep; returned indices refer to `samples`.
std::vector<std::size_t> compute_pareto(const std::vector<SweepSample>& samples);

// Every configuration the sweep will run, validated against the algorithm's declared parameters.
// Throws UnknownParameter, ParameterOutOfBounds, InvalidArgument or InvalidConfig.
std::vector<std::map<std::string, std::string>> expand_configurations(const SweepSpec& spec);

// Runs one fresh benchmark per configuration, sequentially.
SweepResult run_sweep(const SweepSpec& spec);

nlohmann::json to_json(const SweepResult& result);

}  // namespace slambench::runner
