#include "slambench/ingest/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "slambench/error.hpp"
#include "slambench/io/datafile.hpp"
#include "slambench/io/payload.hpp"

namespace slambench::ingest {

using geometry::Pose;
using geometry::Quat;
using geometry::Vec3;

void SyntheticSceneConfig::validate() const {
  const auto bad = [](const std::string& why) { return Error(Errc::InvalidConfig, why); };
  for (int i = 0; i < 3; ++i)
    if (!(room_half_extents[i] > 0.0)) throw bad("room half-extents must be positive");
  if (!(radius >= 0.0) || radius >= std::min(room_half_extents.x(), room_half_extents.z()))
    throw bad("trajectory radius must lie strictly inside the room");
  if (frame_count < 2) throw bad("frame_count must be >= 2");
  if (width < 1 || height < 1) throw bad("image size must be positive");
  if (!(intrinsics.fx > 0.f) || !(intrinsics.fy > 0.f)) throw bad("focal lengths must be positive");
  if (!(intrinsics.cx >= 0.f && intrinsics.cx < static_cast<float>(width)) ||
      !(intrinsics.cy >= 0.f && intrinsics.cy < static_cast<float>(height)))
    throw bad("principal point outside the image");
  if (!(rate_hz > 0.f)) throw bad("rate_hz must be positive");
  if (!(sigma_depth >= 0.0)) throw bad("sigma_depth must be non-negative");
  if (!(depth_scale > 0.f)) throw bad("depth_scale must be positive");
  if (emit_point_cloud && !(cloud_spacing > 0.0)) throw bad("cloud_spacing must be positive");
}

SyntheticSceneConfig parse_synthetic_config(const std::string& text) {
  SyntheticSceneConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw Error(Errc::InvalidConfig, "line " + std::to_string(line_no) + ": expected key=value");
      continue;
    }
    std::istringstream key_in(line.substr(0, eq));
    std::string key;
    key_in >> key;
    std::istringstream val(line.substr(eq + 1));
    const auto fail = [&] { return Error(Errc::InvalidConfig, "line " + std::to_string(line_no) + ": bad value for " + key); };
    const auto num = [&]() {
      double v;
      if (!(val >> v)) throw fail();
      return v;
    };
    if (key == "room_half_extents") {
      for (int i = 0; i < 3; ++i) cfg.room_half_extents[i] = num();
    } else if (key == "width") {
      cfg.width = static_cast<std::uint32_t>(num());
    } else if (key == "height") {
      cfg.height = static_cast<std::uint32_t>(num());
    } else if (key == "fx") {
      cfg.intrinsics.fx = static_cast<float>(num());
    } else if (key == "fy") {
      cfg.intrinsics.fy = static_cast<float>(num());
    } else if (key == "cx") {
      cfg.intrinsics.cx = static_cast<float>(num());
    } else if (key == "cy") {
      cfg.intrinsics.cy = static_cast<float>(num());
    } else if (key == "radius") {
      cfg.radius = num();
    } else if (key == "angular_rate") {
      cfg.angular_rate = num();
    } else if (key == "frame_count") {
      cfg.frame_count = static_cast<std::uint32_t>(num());
    } else if (key == "rate_hz") {
      cfg.rate_hz = static_cast<float>(num());
    } else if (key == "sigma_depth") {
      cfg.sigma_depth = num();
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(num());
    } else if (key == "depth_scale") {
      cfg.depth_scale = static_cast<float>(num());
    } else if (key == "cloud_spacing") {
      cfg.cloud_spacing = num();
    } else if (key == "emit_point_cloud") {
      cfg.emit_point_cloud = num() != 0.0;
    } else {
      throw Error(Errc::InvalidConfig, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }
  return cfg;
}

SyntheticSceneConfig load_synthetic_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::InvalidConfig, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_synthetic_config(ss.str());
}

Pose synthetic_camera_pose(const SyntheticSceneConfig& cfg, std::uint32_t frame) {
  const double theta = cfg.angular_rate * frame;
  const Vec3 position(cfg.radius * std::cos(theta), 0.0, cfg.radius * std::sin(theta));
  return Pose(Quat(Eigen::AngleAxisd(theta, Vec3::UnitY())), position);
}

double synthetic_ray_depth(const SyntheticSceneConfig& cfg, const Pose& camera, double u, double v) {
  const auto& k = cfg.intrinsics;
  const Vec3 ray_cam((u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0);
  const Vec3 dir = camera.rotation() * ray_cam;
  const Vec3& origin = camera.translation();
  // Exit parameter of the ray from inside the box; z_cam = t because ray_cam.z == 1.
  double t = std::numeric_limits<double>::infinity();
  for (int a = 0; a < 3; ++a) {
    if (dir[a] > 0.0) t = std::min(t, (cfg.room_half_extents[a] - origin[a]) / dir[a]);
    if (dir[a] < 0.0) t = std::min(t, (-cfg.room_half_extents[a] - origin[a]) / dir[a]);
  }
  return t;
}

std::vector<Vec3> synthetic_wall_cloud(const SyntheticSceneConfig& cfg) {
  std::vector<Vec3> pts;
  const Vec3& h = cfg.room_half_extents;
  for (int axis = 0; axis < 3; ++axis) {
    const int a1 = (axis + 1) % 3;
    const int a2 = (axis + 2) % 3;
    const auto n1 = static_cast<int>(std::ceil(2.0 * h[a1] / cfg.cloud_spacing));
    const auto n2 = static_cast<int>(std::ceil(2.0 * h[a2] / cfg.cloud_spacing));
    for (double side : {-1.0, 1.0})
      for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
          Vec3 p;
          p[axis] = side * h[axis];
          p[a1] = -h[a1] + (i + 0.5) * (2.0 * h[a1] / n1);
          p[a2] = -h[a2] + (j + 0.5) * (2.0 * h[a2] / n2);
          pts.push_back(p);
        }
  }
  return pts;
}

geometry::Timestamp synthetic_timestamp(const SyntheticSceneConfig& cfg, std::uint32_t frame) {
  const auto offset = static_cast<std::uint64_t>(std::llround(frame * 1e9 / static_cast<double>(cfg.rate_hz)));
  return geometry::Timestamp::from_nanoseconds(1'000'000'000ull + offset);
}

ConversionSummary generate_synthetic(const SyntheticSceneConfig& cfg, const std::filesystem::path& out) {
  cfg.validate();

  std::vector<io::SensorDescriptor> sensors = {
      io::SensorDescriptor::camera(io::SensorType::CameraDepth, cfg.width, cfg.height, cfg.intrinsics, cfg.rate_hz,
                                   cfg.depth_scale),
      io::SensorDescriptor::gt_pose(),
  };
  if (cfg.emit_point_cloud) sensors.push_back(io::SensorDescriptor::gt_point_cloud());

  io::DatafileWriter writer(out, sensors);
  if (cfg.emit_point_cloud) writer.write_gt_frame({geometry::Timestamp{}, 2, io::encode_point_cloud(synthetic_wall_cloud(cfg))});
  for (std::uint32_t k = 0; k < cfg.frame_count; ++k)
    writer.write_gt_frame({synthetic_timestamp(cfg, k), 1, io::encode_pose(synthetic_camera_pose(cfg, k))});

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> noise(0.0, cfg.sigma_depth > 0.0 ? cfg.sigma_depth : 1.0);
  const double max_raw = std::numeric_limits<std::uint16_t>::max();
  std::vector<std::uint8_t> payload(std::size_t{cfg.width} * cfg.height * 2);
  for (std::uint32_t k = 0; k < cfg.frame_count; ++k) {
    const Pose camera = synthetic_camera_pose(cfg, k);
    for (std::uint32_t v = 0; v < cfg.height; ++v)
      for (std::uint32_t u = 0; u < cfg.width; ++u) {
        double z = synthetic_ray_depth(cfg, camera, u, v);
        if (cfg.sigma_depth > 0.0) z += noise(rng);
        double raw = std::round(z / cfg.depth_scale);
        if (!(raw > 0.0) || raw > max_raw) raw = 0.0;  // invalid / out of range
        const auto r = static_cast<std::uint16_t>(raw);
        const std::size_t i = (std::size_t{v} * cfg.width + u) * 2;
        payload[i] = static_cast<std::uint8_t>(r);
        payload[i + 1] = static_cast<std::uint8_t>(r >> 8);
      }
    writer.write_in_frame({synthetic_timestamp(cfg, k), 0, payload});
  }
  writer.close();

  ConversionSummary summary;
  summary.sensors.push_back({"depth", cfg.frame_count});
  summary.sensors.push_back({"gt_pose", cfg.frame_count});
  if (cfg.emit_point_cloud) summary.sensors.push_back({"gt_point_cloud", 1});
  return summary;
}

}  // namespace slambench::ingest
