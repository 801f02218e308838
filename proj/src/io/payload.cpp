#include "slambench/io/payload.hpp"

#include <bit>
#include <string>

#include "slambench/error.hpp"
#include "slambench/io/sensor.hpp"

namespace slambench::io {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back(static_cast<std::uint8_t>(v));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v >> 16));
  out.push_back(static_cast<std::uint8_t>(v >> 24));
}

void put_f32(std::vector<std::uint8_t>& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t{p[0]} | (std::uint32_t{p[1]} << 8) | (std::uint32_t{p[2]} << 16) |
         (std::uint32_t{p[3]} << 24);
}

float get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

std::vector<std::uint8_t> encode_pose(const geometry::Pose& pose) {
  std::vector<std::uint8_t> out;
  out.reserve(kPosePayloadBytes);
  for (float f : pose.to_row_major_float()) put_f32(out, f);
  return out;
}

geometry::Pose decode_pose(std::span<const std::uint8_t> payload) {
  if (payload.size() != kPosePayloadBytes)
    throw Error(Errc::PayloadSizeMismatch, "pose payload must be 64 bytes, got " + std::to_string(payload.size()));
  std::array<float, 16> m{};
  for (std::size_t i = 0; i < 16; ++i) m[i] = get_f32(payload.data() + 4 * i);
  return geometry::Pose::from_row_major(m);
}

std::vector<std::uint8_t> encode_imu(const ImuSample& sample) {
  std::vector<std::uint8_t> out;
  out.reserve(kImuPayloadBytes);
  for (float f : sample.gyro) put_f32(out, f);
  for (float f : sample.accel) put_f32(out, f);
  return out;
}

ImuSample decode_imu(std::span<const std::uint8_t> payload) {
  if (payload.size() != kImuPayloadBytes)
    throw Error(Errc::PayloadSizeMismatch, "imu payload must be 24 bytes, got " + std::to_string(payload.size()));
  ImuSample s;
  for (std::size_t i = 0; i < 3; ++i) {
    s.gyro[i] = get_f32(payload.data() + 4 * i);
    s.accel[i] = get_f32(payload.data() + 12 + 4 * i);
  }
  return s;
}

std::vector<std::uint8_t> encode_point_cloud(std::span<const geometry::Vec3> points) {
  std::vector<std::uint8_t> out;
  out.reserve(4 + 12 * points.size());
  put_u32(out, static_cast<std::uint32_t>(points.size()));
  for (const auto& p : points) {
    put_f32(out, static_cast<float>(p.x()));
    put_f32(out, static_cast<float>(p.y()));
    put_f32(out, static_cast<float>(p.z()));
  }
  return out;
}

std::vector<geometry::Vec3> decode_point_cloud(std::span<const std::uint8_t> payload) {
  if (payload.size() < 4) throw Error(Errc::PayloadSizeMismatch, "point cloud payload shorter than its count prefix");
  const std::uint32_t count = get_u32(payload.data());
  if (payload.size() != 4 + std::size_t{count} * 12)
    throw Error(Errc::PayloadSizeMismatch, "point cloud count " + std::to_string(count) +
                                               " disagrees with payload size " + std::to_string(payload.size()));
  std::vector<geometry::Vec3> pts;
  pts.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint8_t* p = payload.data() + 4 + 12 * i;
    pts.emplace_back(get_f32(p), get_f32(p + 4), get_f32(p + 8));
  }
  return pts;
}

}  // namespace slambench::io
