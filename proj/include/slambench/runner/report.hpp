#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slambench/api/sb_api.hpp"
#include "slambench/geometry/pose.hpp"
#include "slambench/geometry/timestamp.hpp"

namespace slambench::runner {

using geometry::Timestamp;

struct MetricRow {
  std::uint64_t frame = 0;  // input-frame index in the datafile
  Timestamp timestamp;
  double duration = 0.0;                  // seconds inside sb_process_once
  std::map<std::string, double> phases;   // TIMING_PHASE channels published this frame
  std::optional<std::int64_t> memory;     // probe bytes
  std::optional<std::uint64_t> plugin_memory;  // sum of MEMORY_COUNTER channels
  std::optional<double> ate;              // runtime ATE of this frame's estimate, when associated
  std::optional<double> power;            // watts
  std::optional<api::TrackingStatus> status;

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

// Estimated pose as published, kept as raw numbers so reports round-trip bit-exactly.
struct EstimateSample {
  Timestamp timestamp;
  std::array<double, 7> value{};  // x, y, z, qw, qx, qy, qz

  static EstimateSample from_pose(Timestamp t, const geometry::Pose& p);
  geometry::Pose pose() const;
  friend bool operator==(const EstimateSample&, const EstimateSample&) = default;
};

struct RunSummary {
  std::uint64_t frames = 0;  // number of rows
  double total_duration = 0.0;
  std::optional<double> mean_fps;
  std::optional<double> ate_mean, ate_max, ate_rmse;           // runtime, from rows
  std::optional<double> ate_rigid_rmse, ate_similarity_rmse;   // offline alignment
  std::optional<double> similarity_scale;
  std::optional<double> rpe_trans_rmse, rpe_rot_rmse;
  std::optional<std::int64_t> peak_memory;
  std::optional<double> mean_power;
  std::optional<double> rer;
  std::vector<std::string> notes;  // why an offline metric is absent

  friend bool operator==(const RunSummary&, const RunSummary&) = default;
};

struct RunMetadata {
  std::string datafile;
  std::string algorithm;
  std::string library;
  std::map<std::string, std::string> parameters;
  std::uint64_t seed = 0;
  std::string memory_probe;
  std::string memory_probe_note;
  std::string power_probe;
  double max_dt = 0.0;
  bool forward_gt = false;
  std::optional<std::uint64_t> frame_limit;

  friend bool operator==(const RunMetadata&, const RunMetadata&) = default;
};

struct RunReport {
  RunMetadata metadata;
  bool ok = true;
  std::string failure;
  std::vector<MetricRow> rows;
  std::vector<EstimateSample> trajectory;
  RunSummary summary;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

// Fills the row-derived summary fields: frames, duration, FPS, runtime ATE statistics, peak memory
// and mean power.
void summarize_rows(const std::vector<MetricRow>& rows, RunSummary& summary);

std::string_view status_name(api::TrackingStatus s) noexcept;
api::TrackingStatus parse_status(std::string_view s);

nlohmann::json to_json(const MetricRow& row);
nlohmann::json to_json(const RunReport& report);
RunReport report_from_json(const nlohmann::json& j);

enum class ReportFormat { Json, Csv };
ReportFormat parse_report_format(std::string_view s);

// Throws IoFailure.
void export_reports(const std::vector<RunReport>& reports, const std::filesystem::path& path, ReportFormat format);
std::vector<RunReport> import_reports(const std::filesystem::path& path);  // JSON only
void write_csv(const std::vector<RunReport>& reports, std::ostream& out);

}  // namespace slambench::runner
