#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "slambench/geometry/pose.hpp"

namespace slambench::io {

// Little-endian primitive codecs shared by the datafile and payload helpers.
void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v);
void put_f32(std::vector<std::uint8_t>& out, float v);
std::uint32_t get_u32(const std::uint8_t* p);
float get_f32(const std::uint8_t* p);

struct ImuSample {
  std::array<float, 3> gyro{};   // rad/s
  std::array<float, 3> accel{};  // m/s^2
};

// GT pose: 16 float32, row-major 4x4, world-from-body.
std::vector<std::uint8_t> encode_pose(const geometry::Pose& pose);
geometry::Pose decode_pose(std::span<const std::uint8_t> payload);

std::vector<std::uint8_t> encode_imu(const ImuSample& sample);
ImuSample decode_imu(std::span<const std::uint8_t> payload);

// Point cloud: u32 count followed by count * (x, y, z) float32, meters.
std::vector<std::uint8_t> encode_point_cloud(std::span<const geometry::Vec3> points);
std::vector<geometry::Vec3> decode_point_cloud(std::span<const std::uint8_t> payload);

// Depth16 raster helpers: raw value at (u, v), little-endian.
inline std::uint16_t depth_at(std::span<const std::uint8_t> payload, std::uint32_t width,
                              std::uint32_t u, std::uint32_t v) {
  const std::size_t i = (std::size_t{v} * width + u) * 2;
  return static_cast<std::uint16_t>(payload[i] | (payload[i + 1] << 8));
}

}  // namespace slambench::io
