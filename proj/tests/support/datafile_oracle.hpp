#pragma once

// Independent datafile encoder and random datafile generator shared by the tests.

#include <cstring>
#include <fstream>
#include <random>
#include <vector>

#include "slambench/io/datafile.hpp"
#include "support/support.hpp"

namespace support {

using namespace slambench::io;
using slambench::geometry::Timestamp;

// Independent little-endian encoder following the documented layout.
struct Bytes {
  std::vector<std::uint8_t> b;
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) {
    std::uint32_t u;
    std::memcpy(&u, &v, 4);
    u32(u);
  }
  void raw(const std::vector<std::uint8_t>& p) { b.insert(b.end(), p.begin(), p.end()); }
};

inline std::vector<std::uint8_t> expected_bytes(const Datafile& d) {
  Bytes out;
  out.u32(2);
  out.u32(static_cast<std::uint32_t>(d.sensors.size()));
  for (const auto& s : d.sensors) {
    out.u32(static_cast<std::uint32_t>(s.type));
    if (is_camera(s.type)) {
      out.u32(s.width);
      out.u32(s.height);
      out.u32(static_cast<std::uint32_t>(s.pixel_format));
      out.f32(s.rate_hz);
      for (float v : {s.intrinsics.fx, s.intrinsics.fy, s.intrinsics.cx, s.intrinsics.cy}) out.f32(v);
      for (float v : s.intrinsics.distortion) out.f32(v);
      out.f32(s.depth_scale);
    } else if (s.type == SensorType::Imu) {
      out.f32(s.rate_hz);
      out.f32(s.gyro_noise);
      out.f32(s.accel_noise);
    }
  }
  for (const auto* section : {&d.gt_frames, &d.in_frames})
    for (const auto& f : *section) {
      out.u32(f.timestamp.seconds);
      out.u32(f.timestamp.nanoseconds);
      out.u32(f.sensor_index);
      out.raw(f.payload);
    }
  return out.b;
}

inline std::vector<std::uint8_t> file_bytes(const fs::path& p) {
  const std::string s = support::slurp(p);
  return {s.begin(), s.end()};
}

inline void write_bytes(const fs::path& p, const std::vector<std::uint8_t>& b) {
  std::ofstream(p, std::ios::binary).write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(b.size()));
}

inline SensorDescriptor random_sensor(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> type(0, 5), dim(1, 6);
  std::uniform_real_distribution<float> f(0.1f, 100.f);
  const auto t = static_cast<SensorType>(type(rng));
  if (is_camera(t)) {
    const auto w = static_cast<std::uint32_t>(dim(rng)), h = static_cast<std::uint32_t>(dim(rng));
    CameraIntrinsics k{f(rng), f(rng), static_cast<float>(w) * 0.5f, static_cast<float>(h) * 0.5f,
                       {f(rng) - 50.f, f(rng) - 50.f, f(rng) - 50.f, f(rng) - 50.f, f(rng) - 50.f}};
    return SensorDescriptor::camera(t, w, h, k, f(rng), t == SensorType::CameraDepth ? 0.0002f : 0.f);
  }
  if (t == SensorType::Imu) return SensorDescriptor::imu(f(rng), f(rng), f(rng));
  return t == SensorType::GtPose ? SensorDescriptor::gt_pose() : SensorDescriptor::gt_point_cloud();
}

inline std::vector<std::uint8_t> random_payload(std::mt19937_64& rng, const SensorDescriptor& s) {
  std::uniform_int_distribution<int> byte(0, 255), pts(0, 7);
  std::vector<std::uint8_t> p;
  if (const auto n = fixed_payload_size(s)) {
    p.resize(*n);
  } else {
    const auto count = static_cast<std::uint32_t>(pts(rng));
    p.resize(4 + 12 * std::size_t{count});
    for (int i = 0; i < 4; ++i) p[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(count >> (8 * i));
    for (std::size_t i = 4; i < p.size(); ++i) p[i] = static_cast<std::uint8_t>(byte(rng));
    return p;
  }
  for (auto& b : p) b = static_cast<std::uint8_t>(byte(rng));
  return p;
}

inline std::vector<FrameRecord> random_frames(std::mt19937_64& rng, const std::vector<SensorDescriptor>& sensors, bool gt,
                                       int max_frames) {
  std::vector<std::uint32_t> eligible;
  for (std::uint32_t i = 0; i < sensors.size(); ++i)
    if (is_ground_truth(sensors[i].type) == gt) eligible.push_back(i);
  std::vector<FrameRecord> out;
  if (eligible.empty()) return out;
  std::uniform_int_distribution<int> n(0, max_frames);
  std::uniform_int_distribution<std::size_t> pick(0, eligible.size() - 1);
  std::uniform_int_distribution<std::uint64_t> step(0, 3'000'000'000ull);
  std::bernoulli_distribution same(0.15);
  std::uint64_t t = std::uniform_int_distribution<std::uint64_t>(0, 4'000'000'000'000'000'000ull)(rng);
  const int count = n(rng);
  for (int i = 0; i < count; ++i) {
    if (!same(rng)) t += step(rng);
    const auto idx = eligible[pick(rng)];
    out.push_back({Timestamp::from_nanoseconds(t), idx, random_payload(rng, sensors[idx])});
  }
  return out;
}

inline Datafile random_datafile(std::mt19937_64& rng) {
  Datafile d;
  const int ns = std::uniform_int_distribution<int>(1, 5)(rng);
  for (int i = 0; i < ns; ++i) d.sensors.push_back(random_sensor(rng));
  d.gt_frames = random_frames(rng, d.sensors, true, 12);
  d.in_frames = random_frames(rng, d.sensors, false, 25);
  return d;
}

}  // namespace support
