#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace slambench::io {

enum class SensorType : std::uint32_t {
  CameraRgb = 0,
  CameraGrey = 1,
  CameraDepth = 2,
  Imu = 3,
  GtPose = 4,
  GtPointCloud = 5,
  PixelEvent = 6,  // reserved, no codec
};

enum class PixelFormat : std::uint32_t {
  Rgb8 = 0,
  Grey8 = 1,
  Depth16 = 2,
};

// Pinhole model with OpenCV-ordered distortion (k1, k2, p1, p2, k3). Units are pixels.
struct CameraIntrinsics {
  float fx = 0.f;
  float fy = 0.f;
  float cx = 0.f;
  float cy = 0.f;
  std::array<float, 5> distortion{};

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

// Flat sensor description. Only the fields relevant to `type` are serialized.
struct SensorDescriptor {
  SensorType type = SensorType::GtPose;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  PixelFormat pixel_format = PixelFormat::Rgb8;
  float rate_hz = 0.f;
  CameraIntrinsics intrinsics{};
  float depth_scale = 0.f;  // meters per raw depth unit
  float gyro_noise = 0.f;
  float accel_noise = 0.f;

  static SensorDescriptor camera(SensorType type, std::uint32_t width, std::uint32_t height,
                                 const CameraIntrinsics& intrinsics, float rate_hz = 0.f,
                                 float depth_scale = 0.f);
  static SensorDescriptor imu(float rate_hz, float gyro_noise = 0.f, float accel_noise = 0.f);
  static SensorDescriptor gt_pose();
  static SensorDescriptor gt_point_cloud();

  friend bool operator==(const SensorDescriptor&, const SensorDescriptor&) = default;
};

constexpr bool is_camera(SensorType t) noexcept {
  return t == SensorType::CameraRgb || t == SensorType::CameraGrey || t == SensorType::CameraDepth;
}

constexpr bool is_ground_truth(SensorType t) noexcept {
  return t == SensorType::GtPose || t == SensorType::GtPointCloud;
}

constexpr PixelFormat pixel_format_for(SensorType t) noexcept {
  switch (t) {
    case SensorType::CameraGrey: return PixelFormat::Grey8;
    case SensorType::CameraDepth: return PixelFormat::Depth16;
    default: return PixelFormat::Rgb8;
  }
}

constexpr std::size_t bytes_per_pixel(PixelFormat f) noexcept {
  switch (f) {
    case PixelFormat::Rgb8: return 3;
    case PixelFormat::Grey8: return 1;
    case PixelFormat::Depth16: return 2;
  }
  return 0;
}

inline constexpr std::size_t kImuPayloadBytes = 6 * sizeof(float);
inline constexpr std::size_t kPosePayloadBytes = 16 * sizeof(float);

// Fixed payload size for the sensor, or nullopt for self-delimited payloads (point clouds).
inline std::optional<std::size_t> fixed_payload_size(const SensorDescriptor& s) {
  if (is_camera(s.type))
    return std::size_t{s.width} * std::size_t{s.height} * bytes_per_pixel(s.pixel_format);
  if (s.type == SensorType::Imu) return kImuPayloadBytes;
  if (s.type == SensorType::GtPose) return kPosePayloadBytes;
  return std::nullopt;
}

std::string_view sensor_type_name(SensorType t) noexcept;

// Throws InvariantViolation describing the first broken descriptor invariant.
void validate_sensor(const SensorDescriptor& s);

}  // namespace slambench::io
