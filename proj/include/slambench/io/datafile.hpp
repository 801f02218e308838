#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include "slambench/geometry/timestamp.hpp"
#include "slambench/io/sensor.hpp"

namespace slambench::io {

inline constexpr std::uint32_t kDatafileVersion = 2;
inline constexpr std::size_t kHeaderBytes = 8;
inline constexpr std::size_t kFrameHeaderBytes = 12;

struct FrameRecord {
  geometry::Timestamp timestamp;
  std::uint32_t sensor_index = 0;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const FrameRecord&, const FrameRecord&) = default;
};

struct Datafile {
  std::vector<SensorDescriptor> sensors;
  std::vector<FrameRecord> gt_frames;
  std::vector<FrameRecord> in_frames;

  friend bool operator==(const Datafile&, const Datafile&) = default;
};

// Streaming writer. Sections are written in grammar order: header and sensor table on
// construction, then every ground-truth frame, then every input frame.
class DatafileWriter {
 public:
  DatafileWriter(const std::filesystem::path& path, std::vector<SensorDescriptor> sensors);

  DatafileWriter(const DatafileWriter&) = delete;
  DatafileWriter& operator=(const DatafileWriter&) = delete;

  void write_gt_frame(const FrameRecord& frame);
  void write_in_frame(const FrameRecord& frame);

  // Flushes and closes; throws IoFailure if any write failed. Also called by the destructor,
  // which swallows errors.
  void close();
  ~DatafileWriter();

  std::uint64_t bytes_written() const { return bytes_; }

 private:
  void write_frame(const FrameRecord& frame, bool ground_truth);

  std::ofstream out_;
  std::filesystem::path path_;
  std::vector<SensorDescriptor> sensors_;
  bool in_section_started_ = false;
  std::optional<geometry::Timestamp> last_gt_;
  std::optional<geometry::Timestamp> last_in_;
  std::uint64_t bytes_ = 0;
};

// Validates everything up front, then writes. The file is not created if validation fails.
void write_datafile(const std::filesystem::path& path, const std::vector<SensorDescriptor>& sensors,
                    const std::vector<FrameRecord>& gt_frames, const std::vector<FrameRecord>& in_frames);

// Checks a frame against the sensor table; throws BadSensorIndex / PayloadSizeMismatch.
void validate_frame(const std::vector<SensorDescriptor>& sensors, const FrameRecord& frame, bool ground_truth);

// Streaming reader. The header and sensor table are validated eagerly; frames are validated as
// they are read. Input frames and ground-truth frames have independent cursors, each holding at
// most one frame payload.
class DatafileReader {
 public:
  explicit DatafileReader(const std::filesystem::path& path);

  DatafileReader(DatafileReader&&) = default;
  DatafileReader& operator=(DatafileReader&&) = default;

  const std::vector<SensorDescriptor>& sensors() const { return sensors_; }
  const std::filesystem::path& path() const { return path_; }

  // Next frame of the input section, or nullopt at end of stream.
  std::optional<FrameRecord> next_frame();
  // Next frame of the ground-truth section, or nullopt once it is exhausted.
  std::optional<FrameRecord> next_gt_frame();

  void rewind();

 private:
  struct Cursor {
    std::ifstream stream;
    std::uint64_t offset = 0;
    std::optional<geometry::Timestamp> last;
    bool done = false;
  };

  // Reads the 12-byte frame header at the cursor; nullopt at clean EOF.
  struct FrameHeader {
    geometry::Timestamp timestamp;
    std::uint32_t sensor_index;
    std::uint64_t offset;
  };
  std::optional<FrameHeader> read_header(Cursor& c);
  std::uint64_t payload_size(Cursor& c, const FrameHeader& h);
  void read_payload(Cursor& c, const FrameHeader& h, std::vector<std::uint8_t>& out);
  void skip_gt_section(Cursor& c);

  std::filesystem::path path_;
  std::uint64_t file_size_ = 0;
  std::uint64_t frames_offset_ = 0;
  std::vector<SensorDescriptor> sensors_;
  Cursor in_;
  Cursor gt_;
  bool in_positioned_ = false;
};

Datafile read_datafile(const std::filesystem::path& path);

struct DatafileSummary {
  std::filesystem::path path;
  std::vector<SensorDescriptor> sensors;
  std::vector<std::uint64_t> frames_per_sensor;
  std::uint64_t gt_frame_count = 0;
  std::uint64_t in_frame_count = 0;
  std::optional<geometry::Timestamp> first_input;
  std::optional<geometry::Timestamp> last_input;

  // last - first input timestamp, 0 when fewer than two input frames.
  double duration_seconds() const;
};

// Streams every frame once, holding one payload at a time.
DatafileSummary summarize_datafile(const std::filesystem::path& path);

}  // namespace slambench::io
