#pragma once

// Minimal behaviour shared by the fixture plugins: every frame is accepted and the identity pose
// is published at the latest frame time.

#include "slambench/api/sb_api.hpp"

namespace fixture {

namespace api = slambench::api;

inline api::Timestamp g_last;

inline bool register_pose(api::SBConfig* cfg) { return cfg->register_output(api::kPoseChannel, api::OutputKind::Pose); }

inline bool accept(api::SBConfig*, api::SBFrame* f) {
  g_last = f->timestamp;
  return true;
}

inline bool publish_identity(api::SBConfig* cfg) { return cfg->publish_pose(api::kPoseChannel, g_last, {}); }

}  // namespace fixture

