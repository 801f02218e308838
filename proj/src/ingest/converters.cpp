#include "slambench/ingest/converters.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "slambench/error.hpp"
#include "slambench/geometry/pose.hpp"
#include "slambench/geometry/timestamp.hpp"
#include "slambench/ingest/raster.hpp"
#include "slambench/io/datafile.hpp"
#include "slambench/io/payload.hpp"

namespace slambench::ingest {

namespace fs = std::filesystem;
using geometry::Timestamp;

std::uint64_t ConversionSummary::frames(const std::string& sensor) const {
  for (const auto& s : sensors)
    if (s.sensor == sensor) return s.frames;
  return 0;
}

std::string ConversionSummary::to_text() const {
  std::ostringstream out;
  for (const auto& s : sensors) out << s.sensor << ' ' << s.frames << '\n';
  return out.str();
}

namespace {

// One input or ground-truth frame to be materialized at write time. Loading is deferred so only
// one raster is resident during conversion.
struct PendingFrame {
  Timestamp timestamp;
  std::uint32_t sensor_index = 0;
  std::function<std::vector<std::uint8_t>()> load;
};

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

[[noreturn]] void unparseable(const fs::path& file, std::size_t line_no, const std::string& why) {
  throw Error(Errc::UnparseableLine, file.string() + ":" + std::to_string(line_no) + ": " + why);
}

double parse_double(const std::string& tok, const fs::path& file, std::size_t line_no) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) unparseable(file, line_no, "bad number '" + tok + "'");
  return v;
}

Timestamp parse_seconds(const std::string& tok, const fs::path& file, std::size_t line_no) {
  try {
    return geometry::parse_decimal_seconds(tok);
  } catch (const Error&) {
    unparseable(file, line_no, "bad timestamp '" + tok + "'");
  }
}

Timestamp parse_nanoseconds(const std::string& tok, const fs::path& file, std::size_t line_no) {
  std::uint64_t ns = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), ns);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) unparseable(file, line_no, "bad timestamp '" + tok + "'");
  if (ns / Timestamp::kNanosPerSecond > 0xffffffffull) unparseable(file, line_no, "timestamp out of range");
  return Timestamp::from_nanoseconds(ns);
}

// Calls fn(tokens, line_no) for every non-comment, non-blank line of a TUM list file.
void for_each_tum_line(const fs::path& file, const std::function<void(const std::vector<std::string>&, std::size_t)>& fn) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::MissingListFile, file.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    fn(split_ws(t), line_no);
  }
}

struct RasterEntry {
  Timestamp timestamp;
  fs::path path;
};

std::vector<RasterEntry> read_tum_image_list(const fs::path& dir, const std::string& name) {
  std::vector<RasterEntry> out;
  const fs::path list = dir / name;
  for_each_tum_line(list, [&](const std::vector<std::string>& tok, std::size_t line_no) {
    if (tok.size() != 2) unparseable(list, line_no, "expected '<timestamp> <filename>'");
    out.push_back({parse_seconds(tok[0], list, line_no), dir / tok[1]});
  });
  for (const auto& e : out)
    if (!fs::exists(e.path)) throw Error(Errc::MissingRaster, e.path.string());
  return out;
}

struct PoseEntry {
  Timestamp timestamp;
  geometry::Pose pose;
};

// "timestamp tx ty tz qx qy qz qw"
std::vector<PoseEntry> read_tum_groundtruth(const fs::path& list) {
  std::vector<PoseEntry> out;
  for_each_tum_line(list, [&](const std::vector<std::string>& tok, std::size_t line_no) {
    if (tok.size() != 8) unparseable(list, line_no, "expected 'timestamp tx ty tz qx qy qz qw'");
    double v[7];
    for (int i = 0; i < 7; ++i) v[i] = parse_double(tok[static_cast<std::size_t>(i + 1)], list, line_no);
    const geometry::Quat q(v[6], v[3], v[4], v[5]);
    if (q.norm() < 1e-6) unparseable(list, line_no, "zero quaternion");
    out.push_back({parse_seconds(tok[0], list, line_no), geometry::Pose(q, geometry::Vec3(v[0], v[1], v[2]))});
  });
  return out;
}

std::pair<std::uint32_t, std::uint32_t> raster_size(const fs::path& p) {
  const Raster r = read_raster(p);
  return {r.width, r.height};
}

std::vector<std::uint8_t> load_checked(const fs::path& p, std::uint32_t w, std::uint32_t h,
                                       std::vector<std::uint8_t> (*convert)(const Raster&)) {
  const Raster r = read_raster(p);
  if (r.width != w || r.height != h)
    throw Error(Errc::MissingRaster, p.string() + ": raster size differs from the first frame of its sensor");
  return convert(r);
}

// Sorts both sections (stable, so ties keep insertion order) and streams them to `out` via a
// temporary file renamed on success.
void write_pending(const fs::path& out, const std::vector<io::SensorDescriptor>& sensors,
                   std::vector<PendingFrame> gt, std::vector<PendingFrame> in) {
  const auto by_time = [](const PendingFrame& a, const PendingFrame& b) { return a.timestamp < b.timestamp; };
  std::stable_sort(gt.begin(), gt.end(), by_time);
  std::stable_sort(in.begin(), in.end(), by_time);

  const fs::path tmp = fs::path(out.string() + ".partial");
  try {
    io::DatafileWriter writer(tmp, sensors);
    for (auto& f : gt) writer.write_gt_frame({f.timestamp, f.sensor_index, f.load()});
    for (auto& f : in) writer.write_in_frame({f.timestamp, f.sensor_index, f.load()});
    writer.close();
  } catch (...) {
    std::error_code ec;
    fs::remove(tmp, ec);
    throw;
  }
  fs::rename(tmp, out);
}

io::CameraIntrinsics make_intrinsics(float fx, float fy, float cx, float cy, std::array<float, 5> d) {
  return io::CameraIntrinsics{fx, fy, cx, cy, d};
}

// Shared by the TUM and ICL-NUIM converters.
ConversionSummary convert_tum_layout(const fs::path& dir, const fs::path& out, const TumOptions& options,
                                     const io::CameraIntrinsics& intrinsics,
                                     const std::optional<fs::path>& cloud_file) {
  const auto rgb = read_tum_image_list(dir, "rgb.txt");
  const auto depth = read_tum_image_list(dir, "depth.txt");
  const auto gt = read_tum_groundtruth(dir / "groundtruth.txt");

  std::vector<io::ImuSample> accel;
  std::vector<Timestamp> accel_ts;
  const fs::path accel_file = dir / "accelerometer.txt";
  if (fs::exists(accel_file)) {
    for_each_tum_line(accel_file, [&](const std::vector<std::string>& tok, std::size_t line_no) {
      if (tok.size() != 4) unparseable(accel_file, line_no, "expected 'timestamp ax ay az'");
      io::ImuSample s;
      for (std::size_t i = 0; i < 3; ++i) s.accel[i] = static_cast<float>(parse_double(tok[i + 1], accel_file, line_no));
      accel_ts.push_back(parse_seconds(tok[0], accel_file, line_no));
      accel.push_back(s);
    });
  }

  std::vector<std::array<float, 3>> cloud;
  if (cloud_file) cloud = read_point_cloud_file(*cloud_file);

  // Raster dimensions come from the first frame of each stream; fall back to VGA when empty.
  auto [rgb_w, rgb_h] = rgb.empty() ? std::pair<std::uint32_t, std::uint32_t>{640, 480} : raster_size(rgb.front().path);
  auto [dep_w, dep_h] = depth.empty() ? std::pair<std::uint32_t, std::uint32_t>{rgb_w, rgb_h} : raster_size(depth.front().path);

  io::CameraIntrinsics rgb_k = intrinsics;
  io::CameraIntrinsics dep_k = intrinsics;
  rgb_k.cx = std::min(rgb_k.cx, static_cast<float>(rgb_w) - 1.f);
  rgb_k.cy = std::min(rgb_k.cy, static_cast<float>(rgb_h) - 1.f);
  dep_k.cx = std::min(dep_k.cx, static_cast<float>(dep_w) - 1.f);
  dep_k.cy = std::min(dep_k.cy, static_cast<float>(dep_h) - 1.f);

  std::vector<io::SensorDescriptor> sensors = {
      io::SensorDescriptor::camera(io::SensorType::CameraRgb, rgb_w, rgb_h, rgb_k, options.rate_hz),
      io::SensorDescriptor::camera(io::SensorType::CameraDepth, dep_w, dep_h, dep_k, options.rate_hz,
                                   options.depth_scale),
      io::SensorDescriptor::gt_pose(),
  };
  const std::uint32_t rgb_idx = 0, depth_idx = 1, gt_idx = 2;
  std::optional<std::uint32_t> imu_idx, cloud_idx;
  if (!accel.empty()) {
    imu_idx = static_cast<std::uint32_t>(sensors.size());
    sensors.push_back(io::SensorDescriptor::imu(0.f));
  }
  if (cloud_file) {
    cloud_idx = static_cast<std::uint32_t>(sensors.size());
    sensors.push_back(io::SensorDescriptor::gt_point_cloud());
  }

  std::vector<PendingFrame> gt_frames, in_frames;
  for (const auto& e : gt) {
    const geometry::Pose pose = e.pose;
    gt_frames.push_back({e.timestamp, gt_idx, [pose] { return io::encode_pose(pose); }});
  }
  if (cloud_idx) {
    gt_frames.push_back({Timestamp{}, *cloud_idx, [&cloud] {
                           std::vector<geometry::Vec3> pts;
                           pts.reserve(cloud.size());
                           for (const auto& p : cloud) pts.emplace_back(p[0], p[1], p[2]);
                           return io::encode_point_cloud(pts);
                         }});
  }
  for (const auto& e : rgb) {
    const fs::path p = e.path;
    in_frames.push_back({e.timestamp, rgb_idx, [p, w = rgb_w, h = rgb_h] { return load_checked(p, w, h, to_rgb8); }});
  }
  for (const auto& e : depth) {
    const fs::path p = e.path;
    in_frames.push_back({e.timestamp, depth_idx, [p, w = dep_w, h = dep_h] { return load_checked(p, w, h, to_depth16); }});
  }
  for (std::size_t i = 0; i < accel.size(); ++i) {
    const io::ImuSample s = accel[i];
    in_frames.push_back({accel_ts[i], *imu_idx, [s] { return io::encode_imu(s); }});
  }

  write_pending(out, sensors, std::move(gt_frames), std::move(in_frames));

  ConversionSummary summary;
  summary.sensors.push_back({"rgb", rgb.size()});
  summary.sensors.push_back({"depth", depth.size()});
  summary.sensors.push_back({"gt_pose", gt.size()});
  if (imu_idx) {
    summary.sensors.push_back({"imu", accel.size()});
    summary.notes.push_back("imu: accelerometer-only source, gyro components written as zero");
  }
  if (cloud_idx) summary.sensors.push_back({"gt_point_cloud", 1});
  return summary;
}

}  // namespace

io::CameraIntrinsics tum_intrinsics_for(const fs::path& dir) {
  const std::string name = dir.filename().empty() ? dir.parent_path().filename().string() : dir.filename().string();
  if (name.find("freiburg2") != std::string::npos)
    return make_intrinsics(520.9f, 521.0f, 325.1f, 249.7f, {0.2312f, -0.7849f, -0.0033f, -0.0001f, 0.9172f});
  if (name.find("freiburg3") != std::string::npos) return make_intrinsics(535.4f, 539.2f, 320.1f, 247.6f, {});
  return make_intrinsics(517.3f, 516.5f, 318.6f, 255.3f, {0.2624f, -0.9531f, -0.0054f, 0.0026f, 1.1633f});
}

io::CameraIntrinsics icl_nuim_intrinsics() {
  // The published fy is negative (flipped y axis); the datafile stores its magnitude.
  return make_intrinsics(481.20f, 480.0f, 319.5f, 239.5f, {});
}

ConversionSummary convert_tum(const fs::path& dir, const fs::path& out, const TumOptions& options) {
  return convert_tum_layout(dir, out, options, options.intrinsics.value_or(tum_intrinsics_for(dir)), std::nullopt);
}

ConversionSummary convert_icl_nuim(const fs::path& dir, const fs::path& out, const IclNuimOptions& options) {
  std::optional<fs::path> cloud = options.point_cloud;
  if (!cloud) {
    for (const char* name : {"scene.ply", "scene.xyz"})
      if (fs::exists(dir / name)) {
        cloud = dir / name;
        break;
      }
  }
  return convert_tum_layout(dir, out, options.tum, options.tum.intrinsics.value_or(icl_nuim_intrinsics()), cloud);
}

std::vector<std::array<float, 3>> read_point_cloud_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::MalformedPointCloud, path.string() + ": cannot open");
  const auto bad = [&](const std::string& why) { return Error(Errc::MalformedPointCloud, path.string() + ": " + why); };

  std::vector<std::array<float, 3>> pts;
  const auto parse_xyz = [&](const std::string& line) {
    const auto tok = split_ws(line);
    if (tok.size() < 3) throw bad("vertex line with fewer than 3 values");
    std::array<float, 3> p{};
    for (std::size_t i = 0; i < 3; ++i) {
      const auto [ptr, ec] = std::from_chars(tok[i].data(), tok[i].data() + tok[i].size(), p[i]);
      if (ec != std::errc{} || ptr != tok[i].data() + tok[i].size()) throw bad("bad coordinate '" + tok[i] + "'");
    }
    pts.push_back(p);
  };

  std::string line;
  if (!std::getline(in, line)) throw bad("empty file");
  if (trim(line) == "ply") {
    std::uint64_t vertices = 0;
    bool ascii = false;
    bool header_done = false;
    while (std::getline(in, line)) {
      const auto tok = split_ws(line);
      if (tok.empty()) continue;
      if (tok[0] == "format") ascii = tok.size() > 1 && tok[1] == "ascii";
      if (tok[0] == "element" && tok.size() == 3 && tok[1] == "vertex") vertices = std::stoull(tok[2]);
      if (tok[0] == "end_header") {
        header_done = true;
        break;
      }
    }
    if (!header_done) throw bad("missing end_header");
    if (!ascii) throw bad("only ASCII PLY is supported");
    for (std::uint64_t i = 0; i < vertices; ++i) {
      if (!std::getline(in, line)) throw bad("fewer vertices than declared");
      parse_xyz(line);
    }
  } else {
    do {
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#') continue;
      parse_xyz(t);
    } while (std::getline(in, line));
  }
  return pts;
}

// ---------------------------------------------------------------------------------------------
// EuRoC

namespace {

struct CsvTable {
  fs::path file;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, cells)
};

CsvTable read_euroc_csv(const fs::path& file, std::size_t min_columns) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::MissingListFile, file.string());
  CsvTable t{file, {}};
  std::string line;
  if (!std::getline(in, line) || trim(line).empty() || trim(line)[0] != '#' ||
      split_csv(trim(line)).size() < min_columns)
    throw Error(Errc::BadCsvHeader, file.string() + ": expected a '#'-prefixed header with at least " +
                                        std::to_string(min_columns) + " columns");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string tr = trim(line);
    if (tr.empty() || tr[0] == '#') continue;
    auto cells = split_csv(tr);
    if (cells.size() < min_columns) unparseable(file, line_no, "expected " + std::to_string(min_columns) + " columns");
    t.rows.emplace_back(line_no, std::move(cells));
  }
  return t;
}

struct EurocCamera {
  io::CameraIntrinsics intrinsics = make_intrinsics(458.654f, 457.296f, 367.215f, 248.375f,
                                                    {-0.28340811f, 0.07395907f, 0.00019359f, 1.76187114e-05f, 0.f});
  float rate_hz = 20.f;
};

EurocCamera read_camera_yaml(const fs::path& yaml) {
  EurocCamera cam;
  if (!fs::exists(yaml)) return cam;
  try {
    const YAML::Node n = YAML::LoadFile(yaml.string());
    if (const auto k = n["intrinsics"]; k && k.size() == 4) {
      cam.intrinsics.fx = k[0].as<float>();
      cam.intrinsics.fy = k[1].as<float>();
      cam.intrinsics.cx = k[2].as<float>();
      cam.intrinsics.cy = k[3].as<float>();
    }
    if (const auto d = n["distortion_coefficients"]; d) {
      cam.intrinsics.distortion = {};
      for (std::size_t i = 0; i < std::min<std::size_t>(d.size(), 5); ++i) cam.intrinsics.distortion[i] = d[i].as<float>();
    }
    if (const auto r = n["rate_hz"]; r) cam.rate_hz = r.as<float>();
  } catch (const YAML::Exception& e) {
    throw Error(Errc::UnparseableLine, yaml.string() + ": " + e.what());
  }
  return cam;
}

io::SensorDescriptor read_imu_yaml(const fs::path& yaml) {
  io::SensorDescriptor s = io::SensorDescriptor::imu(200.f);
  if (!fs::exists(yaml)) return s;
  try {
    const YAML::Node n = YAML::LoadFile(yaml.string());
    if (n["rate_hz"]) s.rate_hz = n["rate_hz"].as<float>();
    if (n["gyroscope_noise_density"]) s.gyro_noise = n["gyroscope_noise_density"].as<float>();
    if (n["accelerometer_noise_density"]) s.accel_noise = n["accelerometer_noise_density"].as<float>();
  } catch (const YAML::Exception& e) {
    throw Error(Errc::UnparseableLine, yaml.string() + ": " + e.what());
  }
  return s;
}

}  // namespace

ConversionSummary convert_euroc(const fs::path& dir, const fs::path& out) {
  const fs::path root = fs::exists(dir / "mav0") ? dir / "mav0" : dir;
  if (!fs::exists(root / "cam0" / "data.csv")) throw Error(Errc::MissingListFile, (root / "cam0" / "data.csv").string());

  std::vector<io::SensorDescriptor> sensors;
  std::vector<PendingFrame> gt_frames, in_frames;
  ConversionSummary summary;

  for (const char* cam_name : {"cam0", "cam1"}) {
    const fs::path cam_dir = root / cam_name;
    if (!fs::exists(cam_dir / "data.csv")) continue;
    const CsvTable table = read_euroc_csv(cam_dir / "data.csv", 2);
    const EurocCamera cam = read_camera_yaml(cam_dir / "sensor.yaml");

    std::vector<RasterEntry> images;
    for (const auto& [line_no, cells] : table.rows) {
      images.push_back({parse_nanoseconds(cells[0], table.file, line_no), cam_dir / "data" / cells[1]});
      if (!fs::exists(images.back().path)) throw Error(Errc::MissingRaster, images.back().path.string());
    }
    const auto [w, h] = images.empty() ? std::pair<std::uint32_t, std::uint32_t>{752, 480} : raster_size(images.front().path);
    io::CameraIntrinsics k = cam.intrinsics;
    k.cx = std::min(k.cx, static_cast<float>(w) - 1.f);
    k.cy = std::min(k.cy, static_cast<float>(h) - 1.f);
    const auto idx = static_cast<std::uint32_t>(sensors.size());
    sensors.push_back(io::SensorDescriptor::camera(io::SensorType::CameraGrey, w, h, k, cam.rate_hz));
    for (const auto& e : images) {
      const fs::path p = e.path;
      in_frames.push_back({e.timestamp, idx, [p, w = w, h = h] { return load_checked(p, w, h, to_grey8); }});
    }
    summary.sensors.push_back({std::string("grey") + cam_name[3], images.size()});
  }

  if (fs::exists(root / "imu0" / "data.csv")) {
    const CsvTable table = read_euroc_csv(root / "imu0" / "data.csv", 7);
    const auto idx = static_cast<std::uint32_t>(sensors.size());
    sensors.push_back(read_imu_yaml(root / "imu0" / "sensor.yaml"));
    for (const auto& [line_no, cells] : table.rows) {
      io::ImuSample s;
      for (std::size_t i = 0; i < 3; ++i) {
        s.gyro[i] = static_cast<float>(parse_double(cells[1 + i], table.file, line_no));
        s.accel[i] = static_cast<float>(parse_double(cells[4 + i], table.file, line_no));
      }
      in_frames.push_back({parse_nanoseconds(cells[0], table.file, line_no), idx, [s] { return io::encode_imu(s); }});
    }
    summary.sensors.push_back({"imu", table.rows.size()});
  }

  const auto gt_idx = static_cast<std::uint32_t>(sensors.size());
  sensors.push_back(io::SensorDescriptor::gt_pose());
  std::uint64_t gt_count = 0;
  const fs::path gt_csv = root / "state_groundtruth_estimate0" / "data.csv";
  if (fs::exists(gt_csv)) {
    const CsvTable table = read_euroc_csv(gt_csv, 8);
    for (const auto& [line_no, cells] : table.rows) {
      double v[7];
      for (std::size_t i = 0; i < 7; ++i) v[i] = parse_double(cells[1 + i], table.file, line_no);
      const geometry::Quat q(v[3], v[4], v[5], v[6]);
      if (q.norm() < 1e-6) unparseable(table.file, line_no, "zero quaternion");
      const geometry::Pose pose(q, geometry::Vec3(v[0], v[1], v[2]));
      gt_frames.push_back({parse_nanoseconds(cells[0], table.file, line_no), gt_idx, [pose] { return io::encode_pose(pose); }});
      ++gt_count;
    }
  }
  summary.sensors.push_back({"gt_pose", gt_count});

  write_pending(out, sensors, std::move(gt_frames), std::move(in_frames));
  return summary;
}

}  // namespace slambench::ingest
