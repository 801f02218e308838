#pragma once

// Plugin contract between the harness and SLAM algorithm libraries.
//
// A plugin exports, unmangled:
//
//   extern "C" const int sb_api_version;                   // must equal kApiVersion
//   extern "C" bool sb_new_slam_configuration(SBConfig*);   // declare parameters
//   extern "C" bool sb_init_slam_system(SBConfig*);         // allocate, register outputs
//   extern "C" bool sb_update_frame(SBConfig*, SBFrame*);   // true = ready to process
//   extern "C" bool sb_process_once(SBConfig*);
//   extern "C" bool sb_update_outputs(SBConfig*);           // publish estimates
//   extern "C" bool sb_clean_slam_system();
//
// The harness calls them in that order and never out of order. Frame payloads are borrowed for
// the duration of sb_update_frame only. Declared parameters are bound to plugin-owned storage;
// the harness writes overrides into it before sb_init_slam_system and, for parameters marked
// live, between frames.
//
// This header depends only on the standard library plus the timestamp and sensor headers so
// plugins can be built without the rest of the harness.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include "slambench/geometry/timestamp.hpp"
#include "slambench/io/sensor.hpp"

namespace slambench::api {

inline constexpr int kApiVersion = 2;

using geometry::Timestamp;

enum class ValueType : std::uint32_t { Int, Real, Bool, String };

using ParamValue = std::variant<int, double, bool, std::string>;

struct ParameterSpec {
  std::string short_name;
  std::string long_name;
  std::string description;
  ValueType type = ValueType::Int;
  ParamValue default_value = 0;
  std::optional<std::pair<double, double>> bounds;  // inclusive, numeric types only
  bool live = false;                                // may change after initialisation
  void* storage = nullptr;                          // int*, double*, bool* or std::string*
};

template <typename T>
constexpr ValueType value_type_of() {
  if constexpr (std::is_same_v<T, int>) return ValueType::Int;
  else if constexpr (std::is_same_v<T, double>) return ValueType::Real;
  else if constexpr (std::is_same_v<T, bool>) return ValueType::Bool;
  else {
    static_assert(std::is_same_v<T, std::string>, "parameters are int, double, bool or std::string");
    return ValueType::String;
  }
}

// Declaration helper in the style of TypedParameter<int>("mf", "max-features", "...", &v, &d).
template <typename T>
struct TypedParameter : ParameterSpec {
  TypedParameter(std::string short_name_, std::string long_name_, std::string description_, T* storage_,
                 const T* default_value_, std::optional<std::pair<double, double>> bounds_ = std::nullopt,
                 bool live_ = false) {
    short_name = std::move(short_name_);
    long_name = std::move(long_name_);
    description = std::move(description_);
    type = value_type_of<T>();
    default_value = *default_value_;
    bounds = bounds_;
    live = live_;
    storage = storage_;
    *storage_ = *default_value_;
  }
};

enum class OutputKind : std::uint32_t {
  Pose,
  PointCloud,
  FeatureList,
  RgbFrame,
  TrackingStatus,
  TimingPhase,
  MemoryCounter,
};

enum class TrackingStatus : std::uint32_t { Bootstrap, Tracking, Lost };

// World-from-camera rigid transform.
struct PoseValue {
  double qw = 1, qx = 0, qy = 0, qz = 0;
  double tx = 0, ty = 0, tz = 0;
};

inline constexpr std::string_view kPoseChannel = "pose";

struct SBFrame {
  Timestamp timestamp;
  std::uint32_t sensor_index = 0;
  std::span<const std::uint8_t> payload;
};

// Environment shared between harness and plugin.
class SBConfig {
 public:
  virtual ~SBConfig() = default;

  // Returns false (and marks the configuration invalid) on a duplicate short or long name.
  virtual bool add_parameter(const ParameterSpec& spec) = 0;
  bool addParameter(const ParameterSpec& spec) { return add_parameter(spec); }

  virtual std::span<const io::SensorDescriptor> sensors() const = 0;
  virtual bool ui_enabled() const = 0;

  // Outputs must be registered during sb_init_slam_system; kinds are fixed at registration.
  virtual bool register_output(std::string_view name, OutputKind kind) = 0;

  virtual bool publish_pose(std::string_view name, Timestamp t, const PoseValue& pose) = 0;
  virtual bool publish_point_cloud(std::string_view name, Timestamp t, std::span<const float> xyz) = 0;
  virtual bool publish_features(std::string_view name, Timestamp t, std::span<const float> uv) = 0;
  virtual bool publish_rgb_frame(std::string_view name, Timestamp t, std::uint32_t width, std::uint32_t height,
                                 std::span<const std::uint8_t> rgb) = 0;
  virtual bool publish_status(std::string_view name, Timestamp t, TrackingStatus status) = 0;
  virtual bool publish_timing(std::string_view name, Timestamp t, double seconds) = 0;
  virtual bool publish_memory(std::string_view name, Timestamp t, std::uint64_t bytes) = 0;
};

// Resolved entry points, either from a shared library or registered in-process.
struct EntryPoints {
  int api_version = 0;
  bool (*new_slam_configuration)(SBConfig*) = nullptr;
  bool (*init_slam_system)(SBConfig*) = nullptr;
  bool (*update_frame)(SBConfig*, SBFrame*) = nullptr;
  bool (*process_once)(SBConfig*) = nullptr;
  bool (*update_outputs)(SBConfig*) = nullptr;
  bool (*clean_slam_system)() = nullptr;
};

}  // namespace slambench::api

// Defines the exported symbol table from functions in namespace NS (named new_slam_configuration,
// init_slam_system, update_frame, process_once, update_outputs, clean_slam_system). When
// SLAMBENCH_PLUGIN_INPROCESS is defined, it defines NS::entry_points() instead so several plugins
// can live in one binary.
#ifdef SLAMBENCH_PLUGIN_INPROCESS
#define SLAMBENCH_EXPORT_PLUGIN(NS)                                                              \
  namespace NS {                                                                                 \
  ::slambench::api::EntryPoints entry_points() {                                                \
    return {::slambench::api::kApiVersion, &new_slam_configuration, &init_slam_system,           \
            &update_frame, &process_once, &update_outputs, &clean_slam_system};                  \
  }                                                                                              \
  }
#else
#define SLAMBENCH_EXPORT_PLUGIN(NS)                                                              \
  extern "C" {                                                                                   \
  __attribute__((visibility("default"))) extern const int sb_api_version;                        \
  const int sb_api_version = ::slambench::api::kApiVersion;                                    \
  __attribute__((visibility("default"))) bool sb_new_slam_configuration(::slambench::api::SBConfig* c) { \
    return NS::new_slam_configuration(c);                                                        \
  }                                                                                              \
  __attribute__((visibility("default"))) bool sb_init_slam_system(::slambench::api::SBConfig* c) { \
    return NS::init_slam_system(c);                                                              \
  }                                                                                              \
  __attribute__((visibility("default"))) bool sb_update_frame(::slambench::api::SBConfig* c,     \
                                                              ::slambench::api::SBFrame* f) {    \
    return NS::update_frame(c, f);                                                               \
  }                                                                                              \
  __attribute__((visibility("default"))) bool sb_process_once(::slambench::api::SBConfig* c) {   \
    return NS::process_once(c);                                                                  \
  }                                                                                              \
  __attribute__((visibility("default"))) bool sb_update_outputs(::slambench::api::SBConfig* c) { \
    return NS::update_outputs(c);                                                                \
  }                                                                                              \
  __attribute__((visibility("default"))) bool sb_clean_slam_system() { return NS::clean_slam_system(); } \
  }
#endif
