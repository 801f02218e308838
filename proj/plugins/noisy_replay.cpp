// Ground-truth replay with seeded perturbations in the body frame and optional constant drift.
// The first pose is published unperturbed so runtime alignment starts from an exact anchor.

#include <cmath>
#include <fstream>
#include <memory>
#include <random>
#include <string>

#include "common.hpp"
#include "slambench/io/payload.hpp"

namespace slambench::plugins::noisy_replay {

namespace {

struct Params {
  double sigma_trans = 0.0;
  double sigma_rot = 0.0;
  double drift = 0.0;
  int seed = 0;
  std::string noise_log;
};

struct State {
  std::mt19937_64 rng;
  geometry::Pose gt, prev_gt, anchor, published;
  api::Timestamp timestamp;
  bool pending = false;
  bool started = false;
  std::ofstream log;
};

Params g_params;
std::unique_ptr<State> g_state;

geometry::Pose sample_noise(State& s) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  geometry::Vec3 t = geometry::Vec3::Zero();
  if (g_params.sigma_trans > 0.0) t = geometry::Vec3(gauss(s.rng), gauss(s.rng), gauss(s.rng)) * g_params.sigma_trans;
  geometry::Quat q = geometry::Quat::Identity();
  if (g_params.sigma_rot > 0.0) {
    geometry::Vec3 axis(gauss(s.rng), gauss(s.rng), gauss(s.rng));
    if (axis.norm() < 1e-12) axis = geometry::Vec3::UnitX();
    q = geometry::Quat(Eigen::AngleAxisd(gauss(s.rng) * g_params.sigma_rot, axis.normalized()));
  }
  return geometry::Pose(q, t);
}

}  // namespace

bool new_slam_configuration(api::SBConfig* cfg) {
  static const double zero = 0.0;
  static const int seed = 0;
  static const std::string no_log;
  return cfg->add_parameter(api::TypedParameter<double>("st", "sigma-trans", "Translation noise standard deviation (m)",
                                                        &g_params.sigma_trans, &zero, std::pair{0.0, 10.0}, true)) &&
         cfg->add_parameter(api::TypedParameter<double>("sr", "sigma-rot", "Rotation noise standard deviation (rad)",
                                                        &g_params.sigma_rot, &zero, std::pair{0.0, M_PI}, true)) &&
         cfg->add_parameter(api::TypedParameter<double>("d", "drift", "Forward drift added per frame (m)",
                                                        &g_params.drift, &zero, std::pair{0.0, 10.0}, true)) &&
         cfg->add_parameter(api::TypedParameter<int>("s", "seed", "Noise generator seed", &g_params.seed, &seed,
                                                     std::pair{0.0, 2147483647.0})) &&
         cfg->add_parameter(api::TypedParameter<std::string>(
             "nl", "noise-log", "Write sampled perturbations to this file", &g_params.noise_log, &no_log));
}

bool init_slam_system(api::SBConfig* cfg) {
  if (!find_sensor(cfg, io::SensorType::GtPose)) return false;
  g_state = std::make_unique<State>();
  g_state->rng.seed(static_cast<std::uint64_t>(g_params.seed));
  if (!g_params.noise_log.empty()) {
    g_state->log.open(g_params.noise_log);
    if (!g_state->log) return false;
    g_state->log << "# timestamp noise_tx noise_ty noise_tz noise_angle\n";
    g_state->log.precision(17);
  }
  return cfg->register_output(api::kPoseChannel, api::OutputKind::Pose) &&
         cfg->register_output("status", api::OutputKind::TrackingStatus);
}

bool update_frame(api::SBConfig* cfg, api::SBFrame* frame) {
  if (!is_sensor(cfg, frame, io::SensorType::GtPose) || frame->payload.size() != io::kPosePayloadBytes) return false;
  g_state->gt = io::decode_pose(frame->payload);
  g_state->timestamp = frame->timestamp;
  g_state->pending = true;
  return true;
}

bool process_once(api::SBConfig*) {
  State& s = *g_state;
  if (!s.pending) return false;
  s.pending = false;
  geometry::Pose noise;
  if (!s.started) {
    s.anchor = s.gt;
    s.published = s.gt;
    s.started = true;
  } else {
    if (g_params.drift == 0.0) {
      s.anchor = s.gt;
    } else {
      s.anchor = s.anchor * (s.prev_gt.inverse() * s.gt) *
                 geometry::Pose::from_translation(geometry::Vec3(g_params.drift, 0.0, 0.0));
    }
    if (g_params.sigma_trans > 0.0 || g_params.sigma_rot > 0.0) {
      noise = sample_noise(s);
      s.published = s.anchor * noise;
    } else {
      s.published = s.anchor;
    }
  }
  s.prev_gt = s.gt;
  if (s.log.is_open()) {
    const auto& t = noise.translation();
    s.log << geometry::to_string(s.timestamp) << ' ' << t.x() << ' ' << t.y() << ' ' << t.z() << ' ' << noise.angle()
          << '\n';
  }
  return true;
}

bool update_outputs(api::SBConfig* cfg) {
  if (!g_state->started) return cfg->publish_status("status", {}, api::TrackingStatus::Bootstrap);
  return cfg->publish_pose(api::kPoseChannel, g_state->timestamp, to_pose_value(g_state->published)) &&
         cfg->publish_status("status", g_state->timestamp, api::TrackingStatus::Tracking);
}

bool clean_slam_system() {
  g_state.reset();
  return true;
}

}  // namespace slambench::plugins::noisy_replay

SLAMBENCH_EXPORT_PLUGIN(slambench::plugins::noisy_replay)
