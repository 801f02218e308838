// Dense frame-to-frame depth odometry. Each new depth image is unprojected, subsampled by `stride`
// and registered with ICP against the previous image at full resolution. Every buffer is sized at
// initialisation, so the reported memory is constant for the whole run.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <vector>

#include "common.hpp"
#include "slambench/error.hpp"
#include "slambench/io/payload.hpp"
#include "slambench/metrics/icp.hpp"

namespace slambench::plugins::icp_odometry {

using geometry::Pose;
using geometry::Vec3;

namespace {

struct Params {
  int stride = 4;
  int max_iterations = 40;
  double tolerance = 1e-9;
  double max_correspondence_distance = 0.1;
  double divergence_residual = 0.02;
  int map_stride = 4;
  int map_points = 200000;
};

// Unprojected depth image; invalid pixels hold NaN.
struct Cloud {
  std::vector<Vec3> pixels;
  std::vector<Vec3> points;   // valid points with a usable normal
  std::vector<Vec3> normals;
  std::vector<std::uint8_t> surface;  // per pixel: 1 when the pixel is in `points`
  metrics::KdTree index;
};

struct State {
  std::uint32_t depth_index = 0;
  io::SensorDescriptor sensor;
  bool ui = false;

  std::vector<std::uint16_t> depth;  // latest raw frame
  api::Timestamp timestamp;
  bool have_previous = false;

  Cloud previous, current;
  std::vector<Vec3> source;
  std::vector<float> map;  // xyz triples, capacity fixed
  std::vector<std::uint8_t> preview;

  Pose pose;
  Pose velocity;  // last relative motion, used as the next initial guess
  api::TrackingStatus status = api::TrackingStatus::Bootstrap;
  bool processed = false;
  double t_preprocess = 0, t_icp = 0, t_integrate = 0;
  std::uint64_t buffer_bytes = 0;
};

Params g_params;
std::unique_ptr<State> g_state;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

void unproject(const State& s, Cloud& c) {
  const auto& k = s.sensor.intrinsics;
  const std::uint32_t w = s.sensor.width, h = s.sensor.height;
  const double nan = std::nan("");
  for (std::uint32_t v = 0; v < h; ++v)
    for (std::uint32_t u = 0; u < w; ++u) {
      const std::uint16_t raw = s.depth[std::size_t{v} * w + u];
      Vec3& p = c.pixels[std::size_t{v} * w + u];
      if (raw == 0) {
        p = Vec3::Constant(nan);
        continue;
      }
      const double z = raw * static_cast<double>(s.sensor.depth_scale);
      p = Vec3((u - k.cx) / k.fx * z, (v - k.cy) / k.fy * z, z);
    }
}

// Keeps pixels whose forward and backward difference normals agree, i.e. away from creases.
void extract_surface(const State& s, Cloud& c) {
  const std::uint32_t w = s.sensor.width, h = s.sensor.height;
  const auto at = [&](std::uint32_t u, std::uint32_t v) -> const Vec3& { return c.pixels[std::size_t{v} * w + u]; };
  c.points.clear();
  c.normals.clear();
  std::fill(c.surface.begin(), c.surface.end(), 0);
  const double min_cos = std::cos(2.0 * M_PI / 180.0);
  for (std::uint32_t v = 1; v + 1 < h; ++v)
    for (std::uint32_t u = 1; u + 1 < w; ++u) {
      const Vec3& p = at(u, v);
      const Vec3 &r = at(u + 1, v), &l = at(u - 1, v), &d = at(u, v + 1), &up = at(u, v - 1);
      if (!p.allFinite() || !r.allFinite() || !l.allFinite() || !d.allFinite() || !up.allFinite()) continue;
      const Vec3 nf = (r - p).cross(d - p);
      const Vec3 nb = (p - l).cross(p - up);
      if (nf.norm() < 1e-12 || nb.norm() < 1e-12) continue;
      if (nf.normalized().dot(nb.normalized()) < min_cos) continue;
      c.points.push_back(p);
      c.normals.push_back((r - l).cross(d - up).normalized());
      c.surface[std::size_t{v} * w + u] = 1;
    }
  c.index.build(c.points);
}

void reserve_cloud(Cloud& c, std::size_t n) {
  c.pixels.resize(n);
  c.surface.resize(n);
  c.points.reserve(n);
  c.normals.reserve(n);
  c.index.reserve(n);
}

std::uint64_t cloud_bytes(const Cloud& c) {
  return (c.pixels.capacity() + c.points.capacity() + c.normals.capacity()) * sizeof(Vec3) + c.surface.capacity() +
         c.index.capacity_bytes();
}

void copy_depth(State& s, std::span<const std::uint8_t> payload) {
  for (std::size_t i = 0; i < s.depth.size(); ++i)
    s.depth[i] = static_cast<std::uint16_t>(payload[2 * i] | (payload[2 * i + 1] << 8));
}

}  // namespace

bool new_slam_configuration(api::SBConfig* cfg) {
  static const Params d;
  return cfg->add_parameter(api::TypedParameter<int>("s", "stride", "Source subsampling stride (px)", &g_params.stride,
                                                     &d.stride, std::pair{1.0, 64.0}, true)) &&
         cfg->add_parameter(api::TypedParameter<int>("mi", "max-iterations", "Maximum ICP iterations per frame",
                                                     &g_params.max_iterations, &d.max_iterations,
                                                     std::pair{1.0, 1000.0}, true)) &&
         cfg->add_parameter(api::TypedParameter<double>("tol", "tolerance", "ICP convergence tolerance (m)",
                                                        &g_params.tolerance, &d.tolerance, std::pair{1e-15, 1.0},
                                                        true)) &&
         cfg->add_parameter(api::TypedParameter<double>("mcd", "max-correspondence-distance",
                                                        "ICP correspondence gate (m)",
                                                        &g_params.max_correspondence_distance,
                                                        &d.max_correspondence_distance, std::pair{1e-4, 10.0}, true)) &&
         cfg->add_parameter(api::TypedParameter<double>("dr", "divergence-residual",
                                                        "Residual above which tracking is declared lost (m)",
                                                        &g_params.divergence_residual, &d.divergence_residual,
                                                        std::pair{1e-6, 10.0}, true)) &&
         cfg->add_parameter(api::TypedParameter<int>("ms", "map-stride", "Pixel stride of points added to the map",
                                                     &g_params.map_stride, &d.map_stride, std::pair{1.0, 64.0})) &&
         cfg->add_parameter(api::TypedParameter<int>("mp", "map-points", "Map capacity (points)",
                                                     &g_params.map_points, &d.map_points, std::pair{1.0, 5e7}));
}

bool init_slam_system(api::SBConfig* cfg) {
  const auto depth = find_sensor(cfg, io::SensorType::CameraDepth);
  if (!depth) return false;
  auto s = std::make_unique<State>();
  s->depth_index = *depth;
  s->sensor = cfg->sensors()[*depth];
  s->ui = cfg->ui_enabled();
  const std::size_t n = std::size_t{s->sensor.width} * s->sensor.height;
  s->depth.resize(n);
  reserve_cloud(s->previous, n);
  reserve_cloud(s->current, n);
  s->source.reserve(n);
  s->map.reserve(std::size_t(g_params.map_points) * 3);
  if (s->ui) s->preview.resize(n * 3);
  s->buffer_bytes = s->depth.capacity() * sizeof(std::uint16_t) + cloud_bytes(s->previous) +
                    cloud_bytes(s->current) + s->source.capacity() * sizeof(Vec3) +
                    s->map.capacity() * sizeof(float) + s->preview.capacity();
  g_state = std::move(s);

  bool ok = cfg->register_output(api::kPoseChannel, api::OutputKind::Pose) &&
            cfg->register_output("status", api::OutputKind::TrackingStatus) &&
            cfg->register_output("map", api::OutputKind::PointCloud) &&
            cfg->register_output("preprocess", api::OutputKind::TimingPhase) &&
            cfg->register_output("icp", api::OutputKind::TimingPhase) &&
            cfg->register_output("integrate", api::OutputKind::TimingPhase) &&
            cfg->register_output("buffers", api::OutputKind::MemoryCounter);
  if (ok && g_state->ui) ok = cfg->register_output("depth_preview", api::OutputKind::RgbFrame);
  return ok;
}

bool update_frame(api::SBConfig*, api::SBFrame* frame) {
  State& s = *g_state;
  if (frame->sensor_index != s.depth_index || frame->payload.size() != s.depth.size() * 2) return false;
  copy_depth(s, frame->payload);
  s.timestamp = frame->timestamp;
  if (!s.have_previous) {
    unproject(s, s.previous);
    extract_surface(s, s.previous);
    s.have_previous = true;
    return false;
  }
  return true;
}

bool process_once(api::SBConfig*) {
  State& s = *g_state;
  auto t0 = Clock::now();
  unproject(s, s.current);
  extract_surface(s, s.current);
  s.source.clear();
  const auto stride = static_cast<std::uint32_t>(g_params.stride);
  const std::uint32_t w = s.sensor.width, h = s.sensor.height;
  for (std::uint32_t v = stride / 2; v < h; v += stride)
    for (std::uint32_t u = stride / 2; u < w; u += stride)
      if (s.current.surface[std::size_t{v} * w + u]) s.source.push_back(s.current.pixels[std::size_t{v} * w + u]);
  s.t_preprocess = seconds_since(t0);

  t0 = Clock::now();
  bool tracked = false;
  Pose relative;
  try {
    const metrics::IcpParams params{g_params.max_iterations, g_params.tolerance, g_params.max_correspondence_distance};
    const auto r = metrics::icp(s.source, s.previous.index, s.previous.points, params, s.velocity, s.previous.normals);
    tracked = r.residual <= g_params.divergence_residual;
    relative = r.transform;
  } catch (const Error&) {
    tracked = false;
  }
  s.t_icp = seconds_since(t0);

  t0 = Clock::now();
  if (tracked) {
    s.pose = s.pose * relative;
    s.velocity = relative;
    s.status = api::TrackingStatus::Tracking;
    const auto ms = static_cast<std::uint32_t>(g_params.map_stride);
    for (std::uint32_t v = ms / 2; v < h; v += ms)
      for (std::uint32_t u = ms / 2; u < w; u += ms) {
        if (s.map.size() + 3 > s.map.capacity()) break;
        const Vec3& p = s.current.pixels[std::size_t{v} * w + u];
        if (!p.allFinite()) continue;
        const Vec3 q = s.pose.apply(p);
        s.map.insert(s.map.end(), {static_cast<float>(q.x()), static_cast<float>(q.y()), static_cast<float>(q.z())});
      }
  } else {
    s.status = api::TrackingStatus::Lost;
  }
  // The current image becomes the next target either way.
  std::swap(s.previous, s.current);
  if (s.ui) {
    for (std::size_t i = 0; i < s.depth.size(); ++i) {
      const auto g = static_cast<std::uint8_t>(std::min<std::uint32_t>(255u, s.depth[i] / 64u));
      s.preview[3 * i] = s.preview[3 * i + 1] = s.preview[3 * i + 2] = g;
    }
  }
  s.t_integrate = seconds_since(t0);
  s.processed = true;
  return true;
}

bool update_outputs(api::SBConfig* cfg) {
  State& s = *g_state;
  const api::Timestamp t = s.timestamp;
  bool ok = cfg->publish_status("status", t, s.status) && cfg->publish_memory("buffers", t, s.buffer_bytes);
  if (!s.processed) return ok;
  ok = ok && cfg->publish_pose(api::kPoseChannel, t, to_pose_value(s.pose)) &&
       cfg->publish_point_cloud("map", t, s.map) && cfg->publish_timing("preprocess", t, s.t_preprocess) &&
       cfg->publish_timing("icp", t, s.t_icp) && cfg->publish_timing("integrate", t, s.t_integrate);
  if (ok && s.ui) ok = cfg->publish_rgb_frame("depth_preview", t, s.sensor.width, s.sensor.height, s.preview);
  return ok;
}

bool clean_slam_system() {
  g_state.reset();
  return true;
}

}  // namespace slambench::plugins::icp_odometry

SLAMBENCH_EXPORT_PLUGIN(slambench::plugins::icp_odometry)
