#include "slambench/io/datafile.hpp"

#include <array>
#include <string>

#include "slambench/error.hpp"
#include "slambench/io/payload.hpp"

namespace slambench::io {

namespace {

std::vector<std::uint8_t> encode_sensor(const SensorDescriptor& s) {
  std::vector<std::uint8_t> out;
  put_u32(out, static_cast<std::uint32_t>(s.type));
  if (is_camera(s.type)) {
    put_u32(out, s.width);
    put_u32(out, s.height);
    put_u32(out, static_cast<std::uint32_t>(s.pixel_format));
    put_f32(out, s.rate_hz);
    put_f32(out, s.intrinsics.fx);
    put_f32(out, s.intrinsics.fy);
    put_f32(out, s.intrinsics.cx);
    put_f32(out, s.intrinsics.cy);
    for (float d : s.intrinsics.distortion) put_f32(out, d);
    put_f32(out, s.depth_scale);
  } else if (s.type == SensorType::Imu) {
    put_f32(out, s.rate_hz);
    put_f32(out, s.gyro_noise);
    put_f32(out, s.accel_noise);
  }
  return out;
}

constexpr std::size_t kCameraParamBytes = 14 * 4;
constexpr std::size_t kImuParamBytes = 3 * 4;

}  // namespace

void validate_frame(const std::vector<SensorDescriptor>& sensors, const FrameRecord& frame, bool ground_truth) {
  if (frame.sensor_index >= sensors.size())
    throw Error(Errc::BadSensorIndex, "sensor index " + std::to_string(frame.sensor_index) + " >= sensor count " +
                                          std::to_string(sensors.size()));
  const SensorDescriptor& s = sensors[frame.sensor_index];
  if (is_ground_truth(s.type) != ground_truth)
    throw Error(Errc::BadSensorIndex, std::string(sensor_type_name(s.type)) + " sensor cannot emit " +
                                          (ground_truth ? "ground-truth" : "input") + " frames");
  if (!frame.timestamp.valid()) throw Error(Errc::InvariantViolation, "timestamp nanoseconds >= 1e9");
  if (const auto expected = fixed_payload_size(s)) {
    if (frame.payload.size() != *expected)
      throw Error(Errc::PayloadSizeMismatch, std::string(sensor_type_name(s.type)) + " payload must be " +
                                                 std::to_string(*expected) + " bytes, got " +
                                                 std::to_string(frame.payload.size()));
  } else {
    // self-delimited point cloud
    if (frame.payload.size() < 4 || frame.payload.size() != 4 + std::size_t{get_u32(frame.payload.data())} * 12)
      throw Error(Errc::PayloadSizeMismatch, "point cloud payload disagrees with its count prefix");
  }
}

// ---------------------------------------------------------------------------------------------
// Writer

DatafileWriter::DatafileWriter(const std::filesystem::path& path, std::vector<SensorDescriptor> sensors)
    : path_(path), sensors_(std::move(sensors)) {
  if (sensors_.empty()) throw Error(Errc::InvariantViolation, "a datafile needs at least one sensor");
  for (const auto& s : sensors_) validate_sensor(s);

  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw Error(Errc::IoFailure, "cannot open " + path.string() + " for writing");

  std::vector<std::uint8_t> head;
  put_u32(head, kDatafileVersion);
  put_u32(head, static_cast<std::uint32_t>(sensors_.size()));
  for (const auto& s : sensors_) {
    const auto bytes = encode_sensor(s);
    head.insert(head.end(), bytes.begin(), bytes.end());
  }
  out_.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
  bytes_ += head.size();
}

void DatafileWriter::write_gt_frame(const FrameRecord& frame) {
  if (in_section_started_)
    throw Error(Errc::UnsortedFrames, "ground-truth frames must precede all input frames");
  write_frame(frame, true);
}

void DatafileWriter::write_in_frame(const FrameRecord& frame) {
  in_section_started_ = true;
  write_frame(frame, false);
}

void DatafileWriter::write_frame(const FrameRecord& frame, bool ground_truth) {
  if (!out_.is_open()) throw Error(Errc::IoFailure, "writer already closed");
  validate_frame(sensors_, frame, ground_truth);
  auto& last = ground_truth ? last_gt_ : last_in_;
  if (last && frame.timestamp < *last)
    throw Error(Errc::UnsortedFrames, "frame at " + geometry::to_string(frame.timestamp) + " precedes " +
                                          geometry::to_string(*last));
  last = frame.timestamp;

  std::vector<std::uint8_t> head;
  head.reserve(kFrameHeaderBytes);
  put_u32(head, frame.timestamp.seconds);
  put_u32(head, frame.timestamp.nanoseconds);
  put_u32(head, frame.sensor_index);
  out_.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
  out_.write(reinterpret_cast<const char*>(frame.payload.data()), static_cast<std::streamsize>(frame.payload.size()));
  if (!out_) throw Error(Errc::IoFailure, "write failed on " + path_.string());
  bytes_ += head.size() + frame.payload.size();
}

void DatafileWriter::close() {
  if (!out_.is_open()) return;
  out_.flush();
  const bool ok = static_cast<bool>(out_);
  out_.close();
  if (!ok) throw Error(Errc::IoFailure, "flush failed on " + path_.string());
}

DatafileWriter::~DatafileWriter() {
  try {
    close();
  } catch (...) {
  }
}

void write_datafile(const std::filesystem::path& path, const std::vector<SensorDescriptor>& sensors,
                    const std::vector<FrameRecord>& gt_frames, const std::vector<FrameRecord>& in_frames) {
  if (sensors.empty()) throw Error(Errc::InvariantViolation, "a datafile needs at least one sensor");
  for (const auto& s : sensors) validate_sensor(s);
  for (const auto* section : {&gt_frames, &in_frames}) {
    const bool gt = section == &gt_frames;
    for (std::size_t i = 0; i < section->size(); ++i) {
      validate_frame(sensors, (*section)[i], gt);
      if (i > 0 && (*section)[i].timestamp < (*section)[i - 1].timestamp)
        throw Error(Errc::UnsortedFrames, std::string(gt ? "ground-truth" : "input") + " frame " +
                                              std::to_string(i) + " is out of timestamp order");
    }
  }
  DatafileWriter writer(path, sensors);
  for (const auto& f : gt_frames) writer.write_gt_frame(f);
  for (const auto& f : in_frames) writer.write_in_frame(f);
  writer.close();
}

// ---------------------------------------------------------------------------------------------
// Reader

namespace {

void read_exact(std::ifstream& in, std::uint64_t offset, std::uint8_t* dst, std::size_t n, const char* what) {
  in.read(reinterpret_cast<char*>(dst), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in.gcount()) != n)
    throw Error(Errc::TruncatedFile, std::string("file ends inside ") + what, offset);
}

}  // namespace

DatafileReader::DatafileReader(const std::filesystem::path& path) : path_(path) {
  std::error_code ec;
  file_size_ = std::filesystem::file_size(path, ec);
  if (ec) throw Error(Errc::IoFailure, "cannot stat " + path.string() + ": " + ec.message());

  in_.stream.open(path, std::ios::binary);
  if (!in_.stream) throw Error(Errc::IoFailure, "cannot open " + path.string());

  std::array<std::uint8_t, kHeaderBytes> head{};
  read_exact(in_.stream, 0, head.data(), head.size(), "header");
  const std::uint32_t version = get_u32(head.data());
  if (version != kDatafileVersion)
    throw Error(Errc::BadMagicOrVersion, "unsupported datafile version " + std::to_string(version), 0);
  const std::uint32_t count = get_u32(head.data() + 4);
  if (count == 0) throw Error(Errc::InvariantViolation, "sensor count is zero", 4);

  std::uint64_t offset = kHeaderBytes;
  std::array<std::uint8_t, kCameraParamBytes> buf{};
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint64_t sensor_offset = offset;
    read_exact(in_.stream, offset, buf.data(), 4, "sensor table");
    offset += 4;
    SensorDescriptor s;
    const std::uint32_t raw_type = get_u32(buf.data());
    if (raw_type > static_cast<std::uint32_t>(SensorType::PixelEvent))
      throw Error(Errc::InvariantViolation, "unknown sensor type " + std::to_string(raw_type), sensor_offset);
    s.type = static_cast<SensorType>(raw_type);
    if (s.type == SensorType::PixelEvent)
      throw Error(Errc::UnsupportedSensor, "pixel event sensors have no codec", sensor_offset);
    if (is_camera(s.type)) {
      read_exact(in_.stream, offset, buf.data(), kCameraParamBytes, "camera descriptor");
      offset += kCameraParamBytes;
      const std::uint8_t* p = buf.data();
      s.width = get_u32(p);
      s.height = get_u32(p + 4);
      s.pixel_format = static_cast<PixelFormat>(get_u32(p + 8));
      s.rate_hz = get_f32(p + 12);
      s.intrinsics.fx = get_f32(p + 16);
      s.intrinsics.fy = get_f32(p + 20);
      s.intrinsics.cx = get_f32(p + 24);
      s.intrinsics.cy = get_f32(p + 28);
      for (std::size_t k = 0; k < 5; ++k) s.intrinsics.distortion[k] = get_f32(p + 32 + 4 * k);
      s.depth_scale = get_f32(p + 52);
    } else if (s.type == SensorType::Imu) {
      read_exact(in_.stream, offset, buf.data(), kImuParamBytes, "imu descriptor");
      offset += kImuParamBytes;
      s.rate_hz = get_f32(buf.data());
      s.gyro_noise = get_f32(buf.data() + 4);
      s.accel_noise = get_f32(buf.data() + 8);
    }
    try {
      validate_sensor(s);
    } catch (const Error& e) {
      throw Error(e.code(), "sensor " + std::to_string(i) + ": " + e.what(), sensor_offset);
    }
    sensors_.push_back(s);
  }
  frames_offset_ = offset;
  in_.offset = offset;

  gt_.stream.open(path, std::ios::binary);
  if (!gt_.stream) throw Error(Errc::IoFailure, "cannot open " + path.string());
  gt_.stream.seekg(static_cast<std::streamoff>(frames_offset_));
  gt_.offset = frames_offset_;
}

std::optional<DatafileReader::FrameHeader> DatafileReader::read_header(Cursor& c) {
  std::array<std::uint8_t, kFrameHeaderBytes> head{};
  c.stream.read(reinterpret_cast<char*>(head.data()), head.size());
  const auto got = static_cast<std::size_t>(c.stream.gcount());
  if (got == 0) {
    c.stream.clear();
    return std::nullopt;
  }
  if (got != head.size()) throw Error(Errc::TruncatedFile, "file ends inside a frame header", c.offset);

  FrameHeader h{{get_u32(head.data()), get_u32(head.data() + 4)}, get_u32(head.data() + 8), c.offset};
  if (!h.timestamp.valid()) throw Error(Errc::InvariantViolation, "timestamp nanoseconds >= 1e9", h.offset);
  if (h.sensor_index >= sensors_.size())
    throw Error(Errc::InvariantViolation, "sensor index " + std::to_string(h.sensor_index) + " out of range", h.offset);
  return h;
}

std::uint64_t DatafileReader::payload_size(Cursor& c, const FrameHeader& h) {
  const SensorDescriptor& s = sensors_[h.sensor_index];
  const std::uint64_t payload_offset = h.offset + kFrameHeaderBytes;
  std::uint64_t size = 0;
  if (const auto fixed = fixed_payload_size(s)) {
    size = *fixed;
  } else {
    std::array<std::uint8_t, 4> cnt{};
    read_exact(c.stream, payload_offset, cnt.data(), 4, "point cloud count");
    c.stream.seekg(-4, std::ios::cur);
    size = 4 + std::uint64_t{get_u32(cnt.data())} * 12;
  }
  if (payload_offset + size > file_size_)
    throw Error(Errc::TruncatedFile, "frame payload of " + std::to_string(size) + " bytes runs past end of file",
                h.offset);
  return size;
}

void DatafileReader::read_payload(Cursor& c, const FrameHeader& h, std::vector<std::uint8_t>& out) {
  const std::uint64_t size = payload_size(c, h);
  out.resize(size);
  read_exact(c.stream, h.offset + kFrameHeaderBytes, out.data(), size, "frame payload");
  c.offset = h.offset + kFrameHeaderBytes + size;
}

void DatafileReader::skip_gt_section(Cursor& c) {
  while (true) {
    const auto h = read_header(c);
    if (!h) return;
    if (!is_ground_truth(sensors_[h->sensor_index].type)) {
      c.stream.seekg(static_cast<std::streamoff>(h->offset));
      c.offset = h->offset;
      return;
    }
    const std::uint64_t size = payload_size(c, *h);
    c.offset = h->offset + kFrameHeaderBytes + size;
    c.stream.seekg(static_cast<std::streamoff>(c.offset));
  }
}

std::optional<FrameRecord> DatafileReader::next_frame() {
  if (!in_positioned_) {
    skip_gt_section(in_);
    in_positioned_ = true;
  }
  if (in_.done) return std::nullopt;
  const auto h = read_header(in_);
  if (!h) {
    in_.done = true;
    return std::nullopt;
  }
  if (is_ground_truth(sensors_[h->sensor_index].type))
    throw Error(Errc::InvariantViolation, "ground-truth frame inside the input section", h->offset);
  if (in_.last && h->timestamp < *in_.last)
    throw Error(Errc::InvariantViolation, "input frames out of timestamp order", h->offset);
  FrameRecord frame;
  frame.timestamp = h->timestamp;
  frame.sensor_index = h->sensor_index;
  read_payload(in_, *h, frame.payload);
  in_.last = h->timestamp;
  return frame;
}

std::optional<FrameRecord> DatafileReader::next_gt_frame() {
  if (gt_.done) return std::nullopt;
  const auto h = read_header(gt_);
  if (!h || !is_ground_truth(sensors_[h->sensor_index].type)) {
    gt_.done = true;
    return std::nullopt;
  }
  if (gt_.last && h->timestamp < *gt_.last)
    throw Error(Errc::InvariantViolation, "ground-truth frames out of timestamp order", h->offset);
  FrameRecord frame;
  frame.timestamp = h->timestamp;
  frame.sensor_index = h->sensor_index;
  read_payload(gt_, *h, frame.payload);
  gt_.last = h->timestamp;
  return frame;
}

void DatafileReader::rewind() {
  for (Cursor* c : {&in_, &gt_}) {
    c->stream.clear();
    c->stream.seekg(static_cast<std::streamoff>(frames_offset_));
    c->offset = frames_offset_;
    c->last.reset();
    c->done = false;
  }
  in_positioned_ = false;
}

Datafile read_datafile(const std::filesystem::path& path) {
  DatafileReader reader(path);
  Datafile df;
  df.sensors = reader.sensors();
  while (auto f = reader.next_gt_frame()) df.gt_frames.push_back(std::move(*f));
  while (auto f = reader.next_frame()) df.in_frames.push_back(std::move(*f));
  return df;
}

double DatafileSummary::duration_seconds() const {
  if (!first_input || !last_input) return 0.0;
  return geometry::difference_seconds(*last_input, *first_input);
}

DatafileSummary summarize_datafile(const std::filesystem::path& path) {
  DatafileReader reader(path);
  DatafileSummary summary;
  summary.path = path;
  summary.sensors = reader.sensors();
  summary.frames_per_sensor.assign(summary.sensors.size(), 0);
  while (auto f = reader.next_gt_frame()) {
    ++summary.gt_frame_count;
    ++summary.frames_per_sensor[f->sensor_index];
  }
  while (auto f = reader.next_frame()) {
    ++summary.in_frame_count;
    ++summary.frames_per_sensor[f->sensor_index];
    if (!summary.first_input) summary.first_input = f->timestamp;
    summary.last_input = f->timestamp;
  }
  return summary;
}

}  // namespace slambench::io
