#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "slambench/api/sb_api.hpp"
#include "slambench/geometry/pose.hpp"

namespace slambench::loader {

using api::OutputKind;
using api::ParameterSpec;
using api::ParamValue;
using api::TrackingStatus;

struct RgbImage {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> pixels;
};

using OutputValue = std::variant<std::monostate, geometry::Pose, std::vector<float>, RgbImage, TrackingStatus,
                                 double, std::uint64_t>;

struct OutputChannel {
  std::string name;
  OutputKind kind = OutputKind::Pose;
  OutputValue value;                          // monostate until first publish
  std::optional<geometry::Timestamp> timestamp;
  std::uint64_t updates = 0;                  // number of successful publishes
};

std::string_view output_kind_name(OutputKind kind) noexcept;
std::string_view tracking_status_name(TrackingStatus s) noexcept;
std::string_view value_type_name(api::ValueType t) noexcept;

std::string to_string(const ParamValue& v);
// Parses `text` into the parameter's declared type; throws InvalidArgument.
ParamValue parse_parameter_value(const ParameterSpec& spec, const std::string& text);

// Host-side implementation of the SBConfig environment.
class AlgorithmConfig final : public api::SBConfig {
 public:
  bool add_parameter(const ParameterSpec& spec) override;
  std::span<const io::SensorDescriptor> sensors() const override { return sensors_; }
  bool ui_enabled() const override { return ui_enabled_; }
  bool register_output(std::string_view name, OutputKind kind) override;

  bool publish_pose(std::string_view name, geometry::Timestamp t, const api::PoseValue& pose) override;
  bool publish_point_cloud(std::string_view name, geometry::Timestamp t, std::span<const float> xyz) override;
  bool publish_features(std::string_view name, geometry::Timestamp t, std::span<const float> uv) override;
  bool publish_rgb_frame(std::string_view name, geometry::Timestamp t, std::uint32_t width, std::uint32_t height,
                         std::span<const std::uint8_t> rgb) override;
  bool publish_status(std::string_view name, geometry::Timestamp t, TrackingStatus status) override;
  bool publish_timing(std::string_view name, geometry::Timestamp t, double seconds) override;
  bool publish_memory(std::string_view name, geometry::Timestamp t, std::uint64_t bytes) override;

  const std::vector<ParameterSpec>& parameters() const { return parameters_; }
  const ParameterSpec* find_parameter(std::string_view name) const;  // by long or short name
  const std::vector<std::string>& contract_errors() const { return contract_errors_; }

  const std::map<std::string, OutputChannel, std::less<>>& outputs() const { return outputs_; }
  const OutputChannel* output(std::string_view name) const;
  std::vector<const OutputChannel*> outputs_of_kind(OutputKind kind) const;

 private:
  friend class AlgorithmHandle;

  OutputChannel* writable(std::string_view name, OutputKind kind, geometry::Timestamp t);

  std::vector<ParameterSpec> parameters_;
  std::vector<std::string> contract_errors_;
  std::vector<io::SensorDescriptor> sensors_;
  bool ui_enabled_ = false;
  bool registration_open_ = false;
  std::map<std::string, OutputChannel, std::less<>> outputs_;
};

enum class LifecycleState { Created, Configured, Initialised, Finished };
std::string_view lifecycle_state_name(LifecycleState s) noexcept;

// A loaded algorithm instance. Every entry-point call goes through the lifecycle guard; an
// out-of-order call throws LifecycleViolation and is never forwarded to the plugin.
class AlgorithmHandle {
 public:
  // Loads `library` from a private copy so that loading the same file twice yields two
  // independent instances. Throws LoadFailure, MissingSymbol or ApiVersionMismatch.
  static AlgorithmHandle load(const std::filesystem::path& library);
  // Wraps statically registered entry points (one instance per process).
  static AlgorithmHandle in_process(std::string name, const api::EntryPoints& entry_points);

  AlgorithmHandle(AlgorithmHandle&&) noexcept;
  AlgorithmHandle& operator=(AlgorithmHandle&&) noexcept;
  AlgorithmHandle(const AlgorithmHandle&) = delete;
  AlgorithmHandle& operator=(const AlgorithmHandle&) = delete;
  ~AlgorithmHandle();

  // Short name used for CLI overrides and table columns; "libfoo-bar.so" -> "foo-bar".
  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }
  const std::filesystem::path& library() const { return library_; }
  LifecycleState state() const { return state_; }

  // CREATED -> CONFIGURED. Throws DuplicateParameter or ContractViolation.
  void new_configuration();

  const std::vector<ParameterSpec>& parameters() const { return config_->parameters(); }
  ParamValue get_parameter(std::string_view name) const;
  // Before initialisation any declared parameter may be set; afterwards only live ones.
  // Returns the previous value.
  ParamValue set_parameter(std::string_view name, const ParamValue& value);
  ParamValue set_parameter_from_string(std::string_view name, const std::string& text);

  // CONFIGURED -> INITIALISED. Returns false when the plugin rejects the sensor configuration.
  bool init(std::vector<io::SensorDescriptor> sensors, bool ui_enabled);
  // Frames whose sensor index is outside the sensor table are dropped here and return false.
  bool update_frame(const api::SBFrame& frame);
  bool process_once();
  bool update_outputs();
  // INITIALISED -> FINISHED.
  bool clean();

  const AlgorithmConfig& config() const { return *config_; }

 private:
  struct Library;
  AlgorithmHandle() = default;
  void require(LifecycleState expected, std::string_view call) const;

  std::string name_;
  std::filesystem::path library_;
  std::unique_ptr<Library> lib_;
  api::EntryPoints entry_{};
  std::unique_ptr<AlgorithmConfig> config_ = std::make_unique<AlgorithmConfig>();
  LifecycleState state_ = LifecycleState::Created;
  bool ready_ = false;
};

inline AlgorithmHandle load_algorithm(const std::filesystem::path& library) { return AlgorithmHandle::load(library); }

std::string algorithm_name_from_path(const std::filesystem::path& library);

}  // namespace slambench::loader
