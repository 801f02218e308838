#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "slambench/io/sensor.hpp"

namespace slambench::ingest {

struct SensorCount {
  std::string sensor;  // e.g. "rgb", "depth", "gt_pose", "grey0"
  std::uint64_t frames = 0;
};

struct ConversionSummary {
  std::vector<SensorCount> sensors;
  std::vector<std::string> notes;

  std::uint64_t frames(const std::string& sensor) const;
  // One line per sensor: "<sensor> <frame-count>".
  std::string to_text() const;
};

struct TumOptions {
  // Defaults to the Freiburg camera matching the directory name (freiburg1 when unknown).
  std::optional<io::CameraIntrinsics> intrinsics;
  float depth_scale = 1.0f / 5000.0f;
  float rate_hz = 30.0f;
};

io::CameraIntrinsics tum_intrinsics_for(const std::filesystem::path& dir);
io::CameraIntrinsics icl_nuim_intrinsics();

// TUM RGB-D layout: rgb.txt, depth.txt, groundtruth.txt plus the referenced rasters. An optional
// accelerometer.txt becomes an IMU sensor with zero gyro components.
ConversionSummary convert_tum(const std::filesystem::path& dir, const std::filesystem::path& out,
                              const TumOptions& options = {});

struct IclNuimOptions {
  TumOptions tum;  // intrinsics default to the ICL-NUIM camera
  // Scene cloud; when unset, scene.ply and scene.xyz in the directory are tried in that order.
  std::optional<std::filesystem::path> point_cloud;
};

ConversionSummary convert_icl_nuim(const std::filesystem::path& dir, const std::filesystem::path& out,
                                   const IclNuimOptions& options = {});

// EuRoC MAV ASL layout (the directory may be the sequence root or its mav0/ child).
ConversionSummary convert_euroc(const std::filesystem::path& dir, const std::filesystem::path& out);

// ASCII PLY (vertex x y z as the first properties) or whitespace-separated "x y z" lines.
std::vector<std::array<float, 3>> read_point_cloud_file(const std::filesystem::path& path);

}  // namespace slambench::ingest
