// Publishes the most recent ground-truth pose it has been shown. Only useful when the harness
// forwards ground-truth frames to the plugin.

#include <memory>

#include "common.hpp"
#include "slambench/io/payload.hpp"

namespace slambench::plugins::gt_replay {

namespace {

struct State {
  geometry::Pose pose;
  api::Timestamp timestamp;
  bool have_pose = false;
};

std::unique_ptr<State> g_state;

}  // namespace

bool new_slam_configuration(api::SBConfig*) { return true; }

bool init_slam_system(api::SBConfig* cfg) {
  if (!find_sensor(cfg, io::SensorType::GtPose)) return false;
  g_state = std::make_unique<State>();
  return cfg->register_output(api::kPoseChannel, api::OutputKind::Pose) &&
         cfg->register_output("status", api::OutputKind::TrackingStatus);
}

bool update_frame(api::SBConfig* cfg, api::SBFrame* frame) {
  if (!is_sensor(cfg, frame, io::SensorType::GtPose) || frame->payload.size() != io::kPosePayloadBytes) return false;
  g_state->pose = io::decode_pose(frame->payload);
  g_state->timestamp = frame->timestamp;
  g_state->have_pose = true;
  return true;
}

bool process_once(api::SBConfig*) { return g_state->have_pose; }

bool update_outputs(api::SBConfig* cfg) {
  if (!g_state->have_pose) return cfg->publish_status("status", {}, api::TrackingStatus::Bootstrap);
  return cfg->publish_pose(api::kPoseChannel, g_state->timestamp, to_pose_value(g_state->pose)) &&
         cfg->publish_status("status", g_state->timestamp, api::TrackingStatus::Tracking);
}

bool clean_slam_system() {
  g_state.reset();
  return true;
}

}  // namespace slambench::plugins::gt_replay

SLAMBENCH_EXPORT_PLUGIN(slambench::plugins::gt_replay)
