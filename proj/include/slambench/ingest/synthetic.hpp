#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "slambench/geometry/pose.hpp"
#include "slambench/geometry/timestamp.hpp"
#include "slambench/ingest/converters.hpp"
#include "slambench/io/sensor.hpp"

namespace slambench::ingest {

// Axis-aligned box room centred on the origin, observed by a depth camera moving on a horizontal
// circle. At frame k the camera sits at (r cos(w k), 0, r sin(w k)) and is yawed by w k about +y,
// so frame 0 with r = 0 looks straight down +z.
struct SyntheticSceneConfig {
  geometry::Vec3 room_half_extents{1.5, 1.0, 1.5};
  std::uint32_t width = 160;
  std::uint32_t height = 120;
  io::CameraIntrinsics intrinsics{80.f, 80.f, 79.5f, 59.5f, {}};
  double radius = 0.3;
  double angular_rate = 0.01;  // rad per frame
  std::uint32_t frame_count = 60;
  float rate_hz = 30.f;
  double sigma_depth = 0.0;  // m
  std::uint64_t seed = 1;
  float depth_scale = 1.0f / 5000.0f;
  double cloud_spacing = 0.01;  // m, ground-truth wall sampling
  bool emit_point_cloud = true;

  // Throws InvalidConfig.
  void validate() const;
};

// key=value lines, '#' comments. Keys: room_half_extents (3 numbers), width, height, fx, fy, cx,
// cy, radius, angular_rate, frame_count, rate_hz, sigma_depth, seed, depth_scale, cloud_spacing,
// emit_point_cloud.
SyntheticSceneConfig parse_synthetic_config(const std::string& text);
SyntheticSceneConfig load_synthetic_config(const std::filesystem::path& path);

// Analytic scene model, shared by the generator and tests.
geometry::Pose synthetic_camera_pose(const SyntheticSceneConfig& cfg, std::uint32_t frame);
// Camera-frame z depth (m) of the wall seen through pixel (u, v) from `camera`.
double synthetic_ray_depth(const SyntheticSceneConfig& cfg, const geometry::Pose& camera, double u, double v);
std::vector<geometry::Vec3> synthetic_wall_cloud(const SyntheticSceneConfig& cfg);
// Timestamp of frame k: k / rate_hz seconds, starting at 1 s.
geometry::Timestamp synthetic_timestamp(const SyntheticSceneConfig& cfg, std::uint32_t frame);

// Sensors: depth camera, GT pose, and (optionally) GT point cloud at timestamp 0.
ConversionSummary generate_synthetic(const SyntheticSceneConfig& cfg, const std::filesystem::path& out);

}  // namespace slambench::ingest
