#include "slambench/runner/report.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>

#include "slambench/error.hpp"
#include "slambench/metrics/trajectory.hpp"

namespace slambench::runner {

using nlohmann::json;

EstimateSample EstimateSample::from_pose(Timestamp t, const geometry::Pose& p) {
  const auto& q = p.rotation();
  const auto& x = p.translation();
  return {t, {x.x(), x.y(), x.z(), q.w(), q.x(), q.y(), q.z()}};
}

geometry::Pose EstimateSample::pose() const {
  return geometry::Pose(geometry::Quat(value[3], value[4], value[5], value[6]),
                        geometry::Vec3(value[0], value[1], value[2]));
}

void summarize_rows(const std::vector<MetricRow>& rows, RunSummary& s) {
  s.frames = rows.size();
  s.total_duration = 0.0;
  std::vector<double> ate;
  std::optional<std::int64_t> peak;
  double power_sum = 0.0;
  std::size_t power_n = 0;
  for (const auto& r : rows) {
    s.total_duration += r.duration;
    if (r.ate) ate.push_back(*r.ate);
    if (r.memory) peak = std::max(peak.value_or(*r.memory), *r.memory);
    if (r.power) {
      power_sum += *r.power;
      ++power_n;
    }
  }
  s.mean_fps = s.total_duration > 0.0 ? std::optional(static_cast<double>(rows.size()) / s.total_duration) : std::nullopt;
  if (!ate.empty()) {
    const auto st = metrics::error_stats(std::move(ate));
    s.ate_mean = st.mean;
    s.ate_max = st.max;
    s.ate_rmse = st.rmse;
  } else {
    s.ate_mean = s.ate_max = s.ate_rmse = std::nullopt;
  }
  s.peak_memory = peak;
  s.mean_power = power_n ? std::optional(power_sum / static_cast<double>(power_n)) : std::nullopt;
}

std::string_view status_name(api::TrackingStatus s) noexcept {
  switch (s) {
    case api::TrackingStatus::Bootstrap: return "BOOTSTRAP";
    case api::TrackingStatus::Tracking: return "TRACKING";
    case api::TrackingStatus::Lost: return "LOST";
  }
  return "UNKNOWN";
}

api::TrackingStatus parse_status(std::string_view s) {
  if (s == "BOOTSTRAP") return api::TrackingStatus::Bootstrap;
  if (s == "TRACKING") return api::TrackingStatus::Tracking;
  if (s == "LOST") return api::TrackingStatus::Lost;
  throw Error(Errc::InvalidArgument, "unknown tracking status '" + std::string(s) + "'");
}

namespace {

template <typename T>
json opt(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename T>
std::optional<T> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

json ts(Timestamp t) { return json::array({t.seconds, t.nanoseconds}); }
Timestamp ts_from(const json& j) { return {j.at(0).get<std::uint32_t>(), j.at(1).get<std::uint32_t>()}; }

MetricRow row_from_json(const json& j) {
  MetricRow r;
  r.frame = j.at("frame").get<std::uint64_t>();
  r.timestamp = ts_from(j.at("timestamp"));
  r.duration = j.at("duration").get<double>();
  r.phases = j.at("phases").get<std::map<std::string, double>>();
  r.memory = get_opt<std::int64_t>(j, "memory");
  r.plugin_memory = get_opt<std::uint64_t>(j, "plugin_memory");
  r.ate = get_opt<double>(j, "ate");
  r.power = get_opt<double>(j, "power");
  if (const auto s = get_opt<std::string>(j, "status")) r.status = parse_status(*s);
  return r;
}

}  // namespace

json to_json(const MetricRow& r) {
  return {{"frame", r.frame},
          {"timestamp", ts(r.timestamp)},
          {"duration", r.duration},
          {"phases", r.phases},
          {"memory", opt(r.memory)},
          {"plugin_memory", opt(r.plugin_memory)},
          {"ate", opt(r.ate)},
          {"power", opt(r.power)},
          {"status", r.status ? json(status_name(*r.status)) : json(nullptr)}};
}

json to_json(const RunReport& rep) {
  const auto& m = rep.metadata;
  const auto& s = rep.summary;
  json rows = json::array();
  for (const auto& r : rep.rows) rows.push_back(to_json(r));
  json traj = json::array();
  for (const auto& e : rep.trajectory) {
    json row = json::array({e.timestamp.seconds, e.timestamp.nanoseconds});
    for (double v : e.value) row.push_back(v);
    traj.push_back(std::move(row));
  }
  return {{"metadata",
           {{"datafile", m.datafile},
            {"algorithm", m.algorithm},
            {"library", m.library},
            {"parameters", m.parameters},
            {"seed", m.seed},
            {"memory_probe", m.memory_probe},
            {"memory_probe_note", m.memory_probe_note},
            {"power_probe", m.power_probe},
            {"max_dt", m.max_dt},
            {"forward_gt", m.forward_gt},
            {"frame_limit", opt(m.frame_limit)}}},
          {"ok", rep.ok},
          {"failure", rep.failure},
          {"summary",
           {{"frames", s.frames},
            {"total_duration", s.total_duration},
            {"mean_fps", opt(s.mean_fps)},
            {"ate_mean", opt(s.ate_mean)},
            {"ate_max", opt(s.ate_max)},
            {"ate_rmse", opt(s.ate_rmse)},
            {"ate_rigid_rmse", opt(s.ate_rigid_rmse)},
            {"ate_similarity_rmse", opt(s.ate_similarity_rmse)},
            {"similarity_scale", opt(s.similarity_scale)},
            {"rpe_trans_rmse", opt(s.rpe_trans_rmse)},
            {"rpe_rot_rmse", opt(s.rpe_rot_rmse)},
            {"peak_memory", opt(s.peak_memory)},
            {"mean_power", opt(s.mean_power)},
            {"rer", opt(s.rer)},
            {"notes", s.notes}}},
          {"rows", std::move(rows)},
          {"trajectory", std::move(traj)}};
}

RunReport report_from_json(const json& j) {
  RunReport rep;
  const json& m = j.at("metadata");
  rep.metadata.datafile = m.at("datafile").get<std::string>();
  rep.metadata.algorithm = m.at("algorithm").get<std::string>();
  rep.metadata.library = m.at("library").get<std::string>();
  rep.metadata.parameters = m.at("parameters").get<std::map<std::string, std::string>>();
  rep.metadata.seed = m.at("seed").get<std::uint64_t>();
  rep.metadata.memory_probe = m.at("memory_probe").get<std::string>();
  rep.metadata.memory_probe_note = m.at("memory_probe_note").get<std::string>();
  rep.metadata.power_probe = m.at("power_probe").get<std::string>();
  rep.metadata.max_dt = m.at("max_dt").get<double>();
  rep.metadata.forward_gt = m.at("forward_gt").get<bool>();
  rep.metadata.frame_limit = get_opt<std::uint64_t>(m, "frame_limit");
  rep.ok = j.at("ok").get<bool>();
  rep.failure = j.at("failure").get<std::string>();
  const json& s = j.at("summary");
  auto& out = rep.summary;
  out.frames = s.at("frames").get<std::uint64_t>();
  out.total_duration = s.at("total_duration").get<double>();
  out.mean_fps = get_opt<double>(s, "mean_fps");
  out.ate_mean = get_opt<double>(s, "ate_mean");
  out.ate_max = get_opt<double>(s, "ate_max");
  out.ate_rmse = get_opt<double>(s, "ate_rmse");
  out.ate_rigid_rmse = get_opt<double>(s, "ate_rigid_rmse");
  out.ate_similarity_rmse = get_opt<double>(s, "ate_similarity_rmse");
  out.similarity_scale = get_opt<double>(s, "similarity_scale");
  out.rpe_trans_rmse = get_opt<double>(s, "rpe_trans_rmse");
  out.rpe_rot_rmse = get_opt<double>(s, "rpe_rot_rmse");
  out.peak_memory = get_opt<std::int64_t>(s, "peak_memory");
  out.mean_power = get_opt<double>(s, "mean_power");
  out.rer = get_opt<double>(s, "rer");
  out.notes = s.at("notes").get<std::vector<std::string>>();
  for (const auto& r : j.at("rows")) rep.rows.push_back(row_from_json(r));
  for (const auto& e : j.at("trajectory")) {
    EstimateSample sample;
    sample.timestamp = {e.at(0).get<std::uint32_t>(), e.at(1).get<std::uint32_t>()};
    for (std::size_t i = 0; i < 7; ++i) sample.value[i] = e.at(i + 2).get<double>();
    rep.trajectory.push_back(sample);
  }
  return rep;
}

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::Json;
  if (s == "csv") return ReportFormat::Csv;
  throw Error(Errc::InvalidArgument, "unknown report format '" + std::string(s) + "' (expected json or csv)");
}

void write_csv(const std::vector<RunReport>& reports, std::ostream& out) {
  out << "algorithm,frame,timestamp,duration,memory,plugin_memory,ate,power,status,phases\n";
  out << std::setprecision(17);
  for (const auto& rep : reports)
    for (const auto& r : rep.rows) {
      out << rep.metadata.algorithm << ',' << r.frame << ',' << geometry::to_string(r.timestamp) << ',' << r.duration
          << ',';
      if (r.memory) out << *r.memory;
      out << ',';
      if (r.plugin_memory) out << *r.plugin_memory;
      out << ',';
      if (r.ate) out << *r.ate;
      out << ',';
      if (r.power) out << *r.power;
      out << ',';
      if (r.status) out << status_name(*r.status);
      out << ',';
      bool first = true;
      for (const auto& [name, secs] : r.phases) {
        out << (first ? "" : ";") << name << '=' << secs;
        first = false;
      }
      out << '\n';
    }
}

void export_reports(const std::vector<RunReport>& reports, const std::filesystem::path& path, ReportFormat format) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::IoFailure, "cannot write " + path.string());
  if (format == ReportFormat::Json) {
    json all = json::array();
    for (const auto& r : reports) all.push_back(to_json(r));
    out << json{{"reports", std::move(all)}}.dump(1) << '\n';
  } else {
    write_csv(reports, out);
  }
  out.close();
  if (!out) throw Error(Errc::IoFailure, "failed writing " + path.string());
}

std::vector<RunReport> import_reports(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::IoFailure, "cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(Errc::IoFailure, path.string() + ": " + e.what());
  }
  std::vector<RunReport> out;
  for (const auto& r : j.at("reports")) out.push_back(report_from_json(r));
  return out;
}

}  // namespace slambench::runner
