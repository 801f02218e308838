#include "slambench/loader/algorithm.hpp"

#include <dlfcn.h>
#include <stdlib.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "slambench/error.hpp"

namespace slambench::loader {

namespace fs = std::filesystem;

std::string_view output_kind_name(OutputKind kind) noexcept {
  switch (kind) {
    case OutputKind::Pose: return "pose";
    case OutputKind::PointCloud: return "point_cloud";
    case OutputKind::FeatureList: return "feature_list";
    case OutputKind::RgbFrame: return "rgb_frame";
    case OutputKind::TrackingStatus: return "tracking_status";
    case OutputKind::TimingPhase: return "timing_phase";
    case OutputKind::MemoryCounter: return "memory_counter";
  }
  return "unknown";
}

std::string_view tracking_status_name(TrackingStatus s) noexcept {
  switch (s) {
    case TrackingStatus::Bootstrap: return "BOOTSTRAP";
    case TrackingStatus::Tracking: return "TRACKING";
    case TrackingStatus::Lost: return "LOST";
  }
  return "UNKNOWN";
}

std::string_view value_type_name(api::ValueType t) noexcept {
  switch (t) {
    case api::ValueType::Int: return "int";
    case api::ValueType::Real: return "real";
    case api::ValueType::Bool: return "bool";
    case api::ValueType::String: return "string";
  }
  return "unknown";
}

std::string_view lifecycle_state_name(LifecycleState s) noexcept {
  switch (s) {
    case LifecycleState::Created: return "CREATED";
    case LifecycleState::Configured: return "CONFIGURED";
    case LifecycleState::Initialised: return "INITIALISED";
    case LifecycleState::Finished: return "FINISHED";
  }
  return "UNKNOWN";
}

std::string to_string(const ParamValue& v) {
  return std::visit(
      [](const auto& x) -> std::string {
        using T = std::decay_t<decltype(x)>;
        if constexpr (std::is_same_v<T, std::string>) {
          return x;
        } else if constexpr (std::is_same_v<T, bool>) {
          return x ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          std::ostringstream out;
          out.precision(17);
          out << x;
          return out.str();
        } else {
          return std::to_string(x);
        }
      },
      v);
}

ParamValue parse_parameter_value(const ParameterSpec& spec, const std::string& text) {
  const auto bad = [&] {
    return Error(Errc::InvalidArgument, "'" + text + "' is not a valid " + std::string(value_type_name(spec.type)) +
                                            " for parameter " + spec.long_name);
  };
  switch (spec.type) {
    case api::ValueType::Int: {
      int v = 0;
      const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) throw bad();
      return v;
    }
    case api::ValueType::Real: {
      double v = 0;
      const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc{} || p != text.data() + text.size()) throw bad();
      return v;
    }
    case api::ValueType::Bool: {
      std::string t = text;
      std::transform(t.begin(), t.end(), t.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
      if (t == "false" || t == "0" || t == "no" || t == "off") return false;
      throw bad();
    }
    case api::ValueType::String:
      return text;
  }
  throw bad();
}

namespace {

ParamValue coerce(const ParameterSpec& spec, const ParamValue& v) {
  const auto mismatch = [&] {
    return Error(Errc::InvalidArgument, "value " + to_string(v) + " does not fit " +
                                            std::string(value_type_name(spec.type)) + " parameter " + spec.long_name);
  };
  ParamValue out;
  switch (spec.type) {
    case api::ValueType::Int:
      if (const int* i = std::get_if<int>(&v)) out = *i;
      else if (const double* d = std::get_if<double>(&v); d && std::floor(*d) == *d && std::abs(*d) < 2147483648.0)
        out = static_cast<int>(*d);
      else throw mismatch();
      break;
    case api::ValueType::Real:
      if (const double* d = std::get_if<double>(&v)) out = *d;
      else if (const int* i = std::get_if<int>(&v)) out = static_cast<double>(*i);
      else throw mismatch();
      break;
    case api::ValueType::Bool:
      if (const bool* b = std::get_if<bool>(&v)) out = *b;
      else throw mismatch();
      break;
    case api::ValueType::String:
      if (const std::string* s = std::get_if<std::string>(&v)) out = *s;
      else throw mismatch();
      break;
  }
  if (spec.bounds) {
    const double x = std::holds_alternative<int>(out) ? std::get<int>(out) : std::get<double>(out);
    if (x < spec.bounds->first || x > spec.bounds->second)
      throw Error(Errc::ParameterOutOfBounds, spec.long_name + " = " + to_string(out) + " outside [" +
                                                  to_string(spec.bounds->first) + ", " +
                                                  to_string(spec.bounds->second) + "]");
  }
  return out;
}

ParamValue read_storage(const ParameterSpec& spec) {
  switch (spec.type) {
    case api::ValueType::Int: return *static_cast<const int*>(spec.storage);
    case api::ValueType::Real: return *static_cast<const double*>(spec.storage);
    case api::ValueType::Bool: return *static_cast<const bool*>(spec.storage);
    case api::ValueType::String: return *static_cast<const std::string*>(spec.storage);
  }
  return {};
}

void write_storage(const ParameterSpec& spec, const ParamValue& v) {
  switch (spec.type) {
    case api::ValueType::Int: *static_cast<int*>(spec.storage) = std::get<int>(v); break;
    case api::ValueType::Real: *static_cast<double*>(spec.storage) = std::get<double>(v); break;
    case api::ValueType::Bool: *static_cast<bool*>(spec.storage) = std::get<bool>(v); break;
    case api::ValueType::String: *static_cast<std::string*>(spec.storage) = std::get<std::string>(v); break;
  }
}

}  // namespace

// ---------------------------------------------------------------------------------------------
// AlgorithmConfig

bool AlgorithmConfig::add_parameter(const ParameterSpec& spec) {
  const auto clash = [&](const ParameterSpec& p) {
    return p.short_name == spec.short_name || p.long_name == spec.long_name || p.short_name == spec.long_name ||
           p.long_name == spec.short_name;
  };
  if (spec.storage == nullptr || spec.long_name.empty()) {
    contract_errors_.push_back("parameter '" + spec.long_name + "' declared without storage or long name");
    return false;
  }
  if (std::any_of(parameters_.begin(), parameters_.end(), clash)) {
    contract_errors_.push_back("duplicate parameter '" + spec.short_name + "'/'" + spec.long_name + "'");
    return false;
  }
  parameters_.push_back(spec);
  return true;
}

const ParameterSpec* AlgorithmConfig::find_parameter(std::string_view name) const {
  for (const auto& p : parameters_)
    if (p.long_name == name || p.short_name == name) return &p;
  return nullptr;
}

bool AlgorithmConfig::register_output(std::string_view name, OutputKind kind) {
  if (!registration_open_) {
    contract_errors_.push_back("output '" + std::string(name) + "' registered outside sb_init_slam_system");
    return false;
  }
  if (kind == OutputKind::RgbFrame && !ui_enabled_) return false;
  if (outputs_.contains(name)) return false;
  OutputChannel ch{std::string(name), kind, {}, std::nullopt, 0};
  if (kind == OutputKind::TrackingStatus) ch.value = TrackingStatus::Bootstrap;
  outputs_.emplace(std::string(name), std::move(ch));
  return true;
}

const OutputChannel* AlgorithmConfig::output(std::string_view name) const {
  const auto it = outputs_.find(name);
  return it == outputs_.end() ? nullptr : &it->second;
}

std::vector<const OutputChannel*> AlgorithmConfig::outputs_of_kind(OutputKind kind) const {
  std::vector<const OutputChannel*> out;
  for (const auto& [_, ch] : outputs_)
    if (ch.kind == kind) out.push_back(&ch);
  return out;
}

OutputChannel* AlgorithmConfig::writable(std::string_view name, OutputKind kind, geometry::Timestamp t) {
  const auto it = outputs_.find(name);
  if (it == outputs_.end() || it->second.kind != kind || !t.valid()) return nullptr;
  it->second.timestamp = t;
  ++it->second.updates;
  return &it->second;
}

bool AlgorithmConfig::publish_pose(std::string_view name, geometry::Timestamp t, const api::PoseValue& p) {
  const geometry::Quat q(p.qw, p.qx, p.qy, p.qz);
  const bool finite = std::isfinite(p.tx) && std::isfinite(p.ty) && std::isfinite(p.tz) && std::isfinite(q.norm());
  if (!finite || std::abs(q.norm() - 1.0) > 1e-6) {
    contract_errors_.push_back("invalid pose published on '" + std::string(name) + "'");
    return false;
  }
  OutputChannel* ch = writable(name, OutputKind::Pose, t);
  if (!ch) return false;
  ch->value = geometry::Pose(q, geometry::Vec3(p.tx, p.ty, p.tz));
  return true;
}

bool AlgorithmConfig::publish_point_cloud(std::string_view name, geometry::Timestamp t, std::span<const float> xyz) {
  if (xyz.size() % 3 != 0) return false;
  OutputChannel* ch = writable(name, OutputKind::PointCloud, t);
  if (!ch) return false;
  ch->value = std::vector<float>(xyz.begin(), xyz.end());
  return true;
}

bool AlgorithmConfig::publish_features(std::string_view name, geometry::Timestamp t, std::span<const float> uv) {
  if (uv.size() % 2 != 0) return false;
  OutputChannel* ch = writable(name, OutputKind::FeatureList, t);
  if (!ch) return false;
  ch->value = std::vector<float>(uv.begin(), uv.end());
  return true;
}

bool AlgorithmConfig::publish_rgb_frame(std::string_view name, geometry::Timestamp t, std::uint32_t width,
                                        std::uint32_t height, std::span<const std::uint8_t> rgb) {
  if (rgb.size() != std::size_t{width} * height * 3) return false;
  OutputChannel* ch = writable(name, OutputKind::RgbFrame, t);
  if (!ch) return false;
  ch->value = RgbImage{width, height, {rgb.begin(), rgb.end()}};
  return true;
}

bool AlgorithmConfig::publish_status(std::string_view name, geometry::Timestamp t, TrackingStatus status) {
  OutputChannel* ch = writable(name, OutputKind::TrackingStatus, t);
  if (!ch) return false;
  ch->value = status;
  return true;
}

bool AlgorithmConfig::publish_timing(std::string_view name, geometry::Timestamp t, double seconds) {
  if (!(seconds >= 0.0)) return false;
  OutputChannel* ch = writable(name, OutputKind::TimingPhase, t);
  if (!ch) return false;
  ch->value = seconds;
  return true;
}

bool AlgorithmConfig::publish_memory(std::string_view name, geometry::Timestamp t, std::uint64_t bytes) {
  OutputChannel* ch = writable(name, OutputKind::MemoryCounter, t);
  if (!ch) return false;
  ch->value = bytes;
  return true;
}

// ---------------------------------------------------------------------------------------------
// AlgorithmHandle

struct AlgorithmHandle::Library {
  void* dl = nullptr;
  fs::path private_dir;

  ~Library() {
    if (dl) dlclose(dl);
    std::error_code ec;
    if (!private_dir.empty()) fs::remove_all(private_dir, ec);
  }
};

std::string algorithm_name_from_path(const fs::path& library) {
  std::string name = library.filename().string();
  if (const auto so = name.find(".so"); so != std::string::npos) name.erase(so);
  else name = library.stem().string();
  if (name.rfind("lib", 0) == 0 && name.size() > 3) name.erase(0, 3);
  return name;
}

AlgorithmHandle AlgorithmHandle::load(const fs::path& library) {
  if (!fs::exists(library)) throw Error(Errc::LoadFailure, library.string() + ": no such file");

  auto lib = std::make_unique<Library>();
  std::string tmpl = (fs::temp_directory_path() / "slambench-plugin-XXXXXX").string();
  if (!mkdtemp(tmpl.data())) throw Error(Errc::LoadFailure, "cannot create private plugin directory");
  lib->private_dir = tmpl;
  const fs::path copy = lib->private_dir / library.filename();
  std::error_code ec;
  fs::copy_file(library, copy, ec);
  if (ec) throw Error(Errc::LoadFailure, library.string() + ": " + ec.message());

  lib->dl = dlopen(copy.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (!lib->dl) throw Error(Errc::LoadFailure, library.string() + ": " + dlerror());

  const auto sym = [&](const char* name) {
    dlerror();
    void* p = dlsym(lib->dl, name);
    if (!p) throw Error(Errc::MissingSymbol, std::string(name) + " not exported by " + library.string());
    return p;
  };
  AlgorithmHandle h;
  const auto* version = static_cast<const int*>(sym("sb_api_version"));
  h.entry_.new_slam_configuration = reinterpret_cast<bool (*)(api::SBConfig*)>(sym("sb_new_slam_configuration"));
  h.entry_.init_slam_system = reinterpret_cast<bool (*)(api::SBConfig*)>(sym("sb_init_slam_system"));
  h.entry_.update_frame = reinterpret_cast<bool (*)(api::SBConfig*, api::SBFrame*)>(sym("sb_update_frame"));
  h.entry_.process_once = reinterpret_cast<bool (*)(api::SBConfig*)>(sym("sb_process_once"));
  h.entry_.update_outputs = reinterpret_cast<bool (*)(api::SBConfig*)>(sym("sb_update_outputs"));
  h.entry_.clean_slam_system = reinterpret_cast<bool (*)()>(sym("sb_clean_slam_system"));
  h.entry_.api_version = *version;
  if (*version != api::kApiVersion)
    throw Error(Errc::ApiVersionMismatch, library.string() + " implements API version " + std::to_string(*version) +
                                              ", harness supports " + std::to_string(api::kApiVersion));
  h.name_ = algorithm_name_from_path(library);
  h.library_ = library;
  h.lib_ = std::move(lib);
  return h;
}

AlgorithmHandle AlgorithmHandle::in_process(std::string name, const api::EntryPoints& entry_points) {
  if (entry_points.api_version != api::kApiVersion)
    throw Error(Errc::ApiVersionMismatch, name + " implements API version " + std::to_string(entry_points.api_version));
  AlgorithmHandle h;
  h.name_ = std::move(name);
  h.entry_ = entry_points;
  return h;
}

AlgorithmHandle::AlgorithmHandle(AlgorithmHandle&& o) noexcept
    : name_(std::move(o.name_)),
      library_(std::move(o.library_)),
      lib_(std::move(o.lib_)),
      entry_(o.entry_),
      config_(std::move(o.config_)),
      state_(o.state_),
      ready_(o.ready_) {
  o.state_ = LifecycleState::Finished;
  o.entry_ = {};
}

AlgorithmHandle& AlgorithmHandle::operator=(AlgorithmHandle&& o) noexcept {
  if (this != &o) {
    this->~AlgorithmHandle();
    new (this) AlgorithmHandle(std::move(o));
  }
  return *this;
}

AlgorithmHandle::~AlgorithmHandle() {
  if (state_ == LifecycleState::Initialised && entry_.clean_slam_system) {
    try {
      entry_.clean_slam_system();
    } catch (...) {
    }
  }
  config_.reset();
  lib_.reset();
}

void AlgorithmHandle::require(LifecycleState expected, std::string_view call) const {
  if (state_ != expected)
    throw Error(Errc::LifecycleViolation, std::string(call) + " called in state " +
                                              std::string(lifecycle_state_name(state_)) + ", requires " +
                                              std::string(lifecycle_state_name(expected)));
}

void AlgorithmHandle::new_configuration() {
  require(LifecycleState::Created, "sb_new_slam_configuration");
  const bool ok = entry_.new_slam_configuration(config_.get());
  for (const auto& e : config_->contract_errors())
    if (e.rfind("duplicate", 0) == 0) throw Error(Errc::DuplicateParameter, name_ + ": " + e);
  if (!ok) throw Error(Errc::ContractViolation, name_ + ": sb_new_slam_configuration returned false");
  state_ = LifecycleState::Configured;
}

ParamValue AlgorithmHandle::get_parameter(std::string_view name) const {
  const ParameterSpec* spec = config_->find_parameter(name);
  if (!spec) throw Error(Errc::UnknownParameter, name_ + " has no parameter '" + std::string(name) + "'");
  return read_storage(*spec);
}

ParamValue AlgorithmHandle::set_parameter(std::string_view name, const ParamValue& value) {
  if (state_ == LifecycleState::Created || state_ == LifecycleState::Finished)
    throw Error(Errc::LifecycleViolation, "parameters can only be set on a configured or running algorithm");
  const ParameterSpec* spec = config_->find_parameter(name);
  if (!spec) throw Error(Errc::UnknownParameter, name_ + " has no parameter '" + std::string(name) + "'");
  if (state_ == LifecycleState::Initialised && !spec->live)
    throw Error(Errc::ParameterNotLive, spec->long_name + " cannot change after initialisation");
  const ParamValue v = coerce(*spec, value);
  ParamValue previous = read_storage(*spec);
  write_storage(*spec, v);
  return previous;
}

ParamValue AlgorithmHandle::set_parameter_from_string(std::string_view name, const std::string& text) {
  const ParameterSpec* spec = config_->find_parameter(name);
  if (!spec) throw Error(Errc::UnknownParameter, name_ + " has no parameter '" + std::string(name) + "'");
  return set_parameter(name, parse_parameter_value(*spec, text));
}

bool AlgorithmHandle::init(std::vector<io::SensorDescriptor> sensors, bool ui_enabled) {
  require(LifecycleState::Configured, "sb_init_slam_system");
  config_->sensors_ = std::move(sensors);
  config_->ui_enabled_ = ui_enabled;
  config_->outputs_.clear();
  config_->registration_open_ = true;
  const bool ok = entry_.init_slam_system(config_.get());
  config_->registration_open_ = false;
  if (!ok) return false;
  state_ = LifecycleState::Initialised;
  const OutputChannel* pose = config_->output(api::kPoseChannel);
  if (!pose || pose->kind != OutputKind::Pose)
    throw Error(Errc::ContractViolation, name_ + " did not register a POSE output named 'pose'");
  return true;
}

bool AlgorithmHandle::update_frame(const api::SBFrame& frame) {
  require(LifecycleState::Initialised, "sb_update_frame");
  if (frame.sensor_index >= config_->sensors_.size()) return false;
  api::SBFrame copy = frame;
  const bool ready = entry_.update_frame(config_.get(), &copy);
  ready_ = ready_ || ready;
  return ready;
}

bool AlgorithmHandle::process_once() {
  require(LifecycleState::Initialised, "sb_process_once");
  if (!ready_) throw Error(Errc::LifecycleViolation, "sb_process_once called before sb_update_frame signalled ready");
  ready_ = false;
  return entry_.process_once(config_.get());
}

bool AlgorithmHandle::update_outputs() {
  require(LifecycleState::Initialised, "sb_update_outputs");
  return entry_.update_outputs(config_.get());
}

bool AlgorithmHandle::clean() {
  require(LifecycleState::Initialised, "sb_clean_slam_system");
  state_ = LifecycleState::Finished;
  return entry_.clean_slam_system();
}

}  // namespace slambench::loader
