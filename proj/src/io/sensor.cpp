#include "slambench/io/sensor.hpp"

#include <cmath>

#include "slambench/error.hpp"

namespace slambench::io {

SensorDescriptor SensorDescriptor::camera(SensorType type, std::uint32_t width, std::uint32_t height,
                                          const CameraIntrinsics& intrinsics, float rate_hz,
                                          float depth_scale) {
  SensorDescriptor s;
  s.type = type;
  s.width = width;
  s.height = height;
  s.pixel_format = pixel_format_for(type);
  s.rate_hz = rate_hz;
  s.intrinsics = intrinsics;
  s.depth_scale = depth_scale;
  return s;
}

SensorDescriptor SensorDescriptor::imu(float rate_hz, float gyro_noise, float accel_noise) {
  SensorDescriptor s;
  s.type = SensorType::Imu;
  s.rate_hz = rate_hz;
  s.gyro_noise = gyro_noise;
  s.accel_noise = accel_noise;
  return s;
}

SensorDescriptor SensorDescriptor::gt_pose() {
  SensorDescriptor s;
  s.type = SensorType::GtPose;
  return s;
}

SensorDescriptor SensorDescriptor::gt_point_cloud() {
  SensorDescriptor s;
  s.type = SensorType::GtPointCloud;
  return s;
}

std::string_view sensor_type_name(SensorType t) noexcept {
  switch (t) {
    case SensorType::CameraRgb: return "rgb";
    case SensorType::CameraGrey: return "grey";
    case SensorType::CameraDepth: return "depth";
    case SensorType::Imu: return "imu";
    case SensorType::GtPose: return "gt_pose";
    case SensorType::GtPointCloud: return "gt_point_cloud";
    case SensorType::PixelEvent: return "pixel_event";
  }
  return "unknown";
}

void validate_sensor(const SensorDescriptor& s) {
  const auto fail = [&](const std::string& what) {
    throw Error(Errc::InvariantViolation, std::string(sensor_type_name(s.type)) + " sensor: " + what);
  };
  switch (s.type) {
    case SensorType::CameraRgb:
    case SensorType::CameraGrey:
    case SensorType::CameraDepth: {
      if (s.width < 1 || s.height < 1) fail("width and height must be >= 1");
      if (s.pixel_format != pixel_format_for(s.type)) fail("pixel format does not match camera type");
      const auto& k = s.intrinsics;
      if (!(k.fx > 0.f) || !(k.fy > 0.f)) fail("focal lengths must be positive");
      if (!(k.cx >= 0.f && k.cx < static_cast<float>(s.width))) fail("cx outside [0, width)");
      if (!(k.cy >= 0.f && k.cy < static_cast<float>(s.height))) fail("cy outside [0, height)");
      for (float d : k.distortion)
        if (!std::isfinite(d)) fail("non-finite distortion coefficient");
      if (s.type == SensorType::CameraDepth && !(s.depth_scale > 0.f)) fail("depth_scale must be positive");
      if (!(s.rate_hz >= 0.f)) fail("negative rate");
      break;
    }
    case SensorType::Imu:
      if (!(s.rate_hz >= 0.f) || !(s.gyro_noise >= 0.f) || !(s.accel_noise >= 0.f))
        fail("rate and noise densities must be non-negative");
      break;
    case SensorType::GtPose:
    case SensorType::GtPointCloud:
      break;
    case SensorType::PixelEvent:
      throw Error(Errc::UnsupportedSensor, "pixel event sensors have no codec");
    default:
      throw Error(Errc::InvariantViolation, "unknown sensor type " + std::to_string(static_cast<std::uint32_t>(s.type)));
  }
}

}  // namespace slambench::io
