#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "slambench/io/datafile.hpp"
#include "slambench/loader/algorithm.hpp"
#include "slambench/metrics/probes.hpp"
#include "slambench/metrics/trajectory.hpp"
#include "slambench/runner/report.hpp"

namespace slambench::runner {

struct AlgorithmSpec {
  std::filesystem::path library;
  std::string name;  // defaults to the name derived from the library file
  std::vector<std::pair<std::string, std::string>> parameters;  // long or short name -> value text
};

struct RunSpec {
  std::filesystem::path datafile;
  std::vector<AlgorithmSpec> algorithms;
  std::optional<std::uint64_t> frame_limit;  // input frames
  double max_dt = metrics::kDefaultMaxDt;
  metrics::MemoryProbeKind memory_probe = metrics::MemoryProbeKind::AllocationHook;
  std::optional<std::filesystem::path> power_trace;
  bool forward_gt = false;  // test mode: deliver ground-truth frames to the plugins
  bool ui_enabled = false;
  std::uint64_t seed = 0;
  std::size_t rpe_delta = 1;
  bool compute_rer = true;
  double rer_max_correspondence_distance = 0.05;
  int rer_max_iterations = 50;
  std::size_t rer_point_budget = 100000;  // estimated cloud is decimated to this many points
};

// Throws InvalidConfig when the spec cannot describe a run.
void validate(const RunSpec& spec);

// Rejects duplicate algorithm names. Returns the resolved names in spec order.
std::vector<std::string> resolve_algorithm_names(const RunSpec& spec);

// One algorithm's state inside a Benchmark.
class AlgorithmRun {
 public:
  const std::string& name() const { return report_.metadata.algorithm; }
  bool failed() const { return !report_.ok; }
  const RunReport& report() const { return report_; }
  loader::AlgorithmHandle* handle() { return handle_ ? &*handle_ : nullptr; }
  const loader::AlgorithmHandle* handle() const { return handle_ ? &*handle_ : nullptr; }
  const std::vector<metrics::AssociatedPair>& pairs() const { return pairs_; }

 private:
  friend class Benchmark;

  std::optional<loader::AlgorithmHandle> handle_;
  RunReport report_;
  std::int64_t attributed_bytes_ = 0;
  std::uint64_t pose_updates_ = 0;
  std::optional<metrics::Associator> associator_;
  std::optional<geometry::Pose> alignment_;
  std::vector<metrics::AssociatedPair> pairs_;
};

struct FrameStep {
  std::uint64_t frame = 0;
  geometry::Timestamp timestamp;
  std::vector<std::optional<MetricRow>> rows;           // per algorithm
  std::vector<std::optional<EstimateSample>> estimates;  // per algorithm, new pose sample if any
  std::vector<metrics::TrajectorySample> ground_truth;   // GT poses up to this frame's time, new this step
};

// Drives every algorithm of a RunSpec over one datafile, one input frame at a time. Failures of one
// algorithm (loading, lifecycle, plugin errors) mark that run failed; the others continue.
class Benchmark {
 public:
  explicit Benchmark(RunSpec spec);
  ~Benchmark();
  Benchmark(const Benchmark&) = delete;
  Benchmark& operator=(const Benchmark&) = delete;

  const RunSpec& spec() const { return spec_; }
  const std::vector<metrics::TrajectorySample>& ground_truth() const { return gt_; }
  const std::vector<geometry::Vec3>& ground_truth_cloud() const { return gt_cloud_; }
  std::size_t size() const { return runs_.size(); }
  const AlgorithmRun& run(std::size_t i) const { return *runs_.at(i); }
  std::vector<std::string> names() const;

  // Delivers the next input frame. Returns nullopt at end of stream or at the frame limit.
  std::optional<FrameStep> step();
  std::uint64_t frames_delivered() const { return next_frame_; }
  bool exhausted() const { return exhausted_; }

  // Live parameter change between frames; returns the previous value.
  api::ParamValue set_parameter(std::size_t algorithm, std::string_view name, const api::ParamValue& value);

  // Cleans every algorithm, computes offline metrics and returns one report per algorithm.
  // Idempotent.
  const std::vector<RunReport>& finish();
  bool finished() const { return finished_; }

 private:
  void fail(AlgorithmRun& run, const std::string& why);
  template <typename F>
  auto attributed(AlgorithmRun& run, F&& call);
  void offline_metrics(AlgorithmRun& run);

  RunSpec spec_;
  std::unique_ptr<io::DatafileReader> reader_;
  std::unique_ptr<io::DatafileReader> gt_reader_;  // forward-GT cursor
  std::optional<io::FrameRecord> pending_gt_;
  std::vector<io::SensorDescriptor> sensors_;
  std::vector<metrics::TrajectorySample> gt_;
  std::size_t gt_reported_ = 0;
  std::vector<geometry::Vec3> gt_cloud_;
  std::vector<std::unique_ptr<AlgorithmRun>> runs_;
  std::unique_ptr<metrics::MemoryProbe> memory_;
  std::string memory_note_;
  std::unique_ptr<metrics::PowerProbe> power_;
  std::chrono::steady_clock::time_point start_;
  std::uint64_t next_frame_ = 0;
  bool exhausted_ = false;
  bool finished_ = false;
  std::vector<RunReport> reports_;
};

// Column layout of the benchmark table: `frame timestamp` then, per algorithm,
// `<algo>_duration <algo>_memory <algo>_ATE`.
void write_table_header(std::ostream& out, const std::vector<std::string>& names);
void write_table_row(std::ostream& out, const FrameStep& step);

// Runs the whole spec. When `table` is set, rows are streamed to it as they are produced.
std::vector<RunReport> run_benchmark(const RunSpec& spec, std::ostream* table = nullptr);

}  // namespace slambench::runner
