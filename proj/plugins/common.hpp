#pragma once

#include <optional>

#include "slambench/api/sb_api.hpp"
#include "slambench/geometry/pose.hpp"

namespace slambench::plugins {

inline api::PoseValue to_pose_value(const geometry::Pose& p) {
  const auto& q = p.rotation();
  const auto& t = p.translation();
  return {q.w(), q.x(), q.y(), q.z(), t.x(), t.y(), t.z()};
}

inline bool is_sensor(const api::SBConfig* cfg, const api::SBFrame* f, io::SensorType type) {
  const auto sensors = cfg->sensors();
  return f->sensor_index < sensors.size() && sensors[f->sensor_index].type == type;
}

inline std::optional<std::uint32_t> find_sensor(const api::SBConfig* cfg, io::SensorType type) {
  const auto sensors = cfg->sensors();
  for (std::uint32_t i = 0; i < sensors.size(); ++i)
    if (sensors[i].type == type) return i;
  return std::nullopt;
}

}  // namespace slambench::plugins
