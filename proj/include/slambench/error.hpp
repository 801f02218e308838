#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace slambench {

enum class Errc {
  InvalidArgument,
  SizeMismatch,
  DegenerateGeometry,
  // datafile
  UnsortedFrames,
  PayloadSizeMismatch,
  BadSensorIndex,
  IoFailure,
  BadMagicOrVersion,
  TruncatedFile,
  InvariantViolation,
  UnsupportedSensor,
  // ingest
  MissingListFile,
  UnparseableLine,
  MissingRaster,
  MalformedPointCloud,
  BadCsvHeader,
  InvalidConfig,
  // algorithm api / loader
  DuplicateParameter,
  UnknownParameter,
  ParameterOutOfBounds,
  ParameterNotLive,
  LifecycleViolation,
  ContractViolation,
  MissingSymbol,
  ApiVersionMismatch,
  LoadFailure,
  // metrics
  EmptyPairs,
  InsufficientPairs,
  NoCorrespondences,
  ProbeUnavailable,
  // runner
  NoValidSamples,
  NameCollision,
  SessionNotFound,
};

std::string_view errc_name(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

  Error(Errc code, const std::string& message, std::uint64_t byte_offset)
      : std::runtime_error(std::string(errc_name(code)) + ": " + message + " (at byte offset " +
                           std::to_string(byte_offset) + ")"),
        code_(code),
        offset_(byte_offset) {}

  Errc code() const noexcept { return code_; }

  // Byte offset into the datafile where a parse error was detected.
  std::optional<std::uint64_t> offset() const noexcept { return offset_; }

 private:
  Errc code_;
  std::optional<std::uint64_t> offset_;
};

}  // namespace slambench
