#include "slambench/error.hpp"

namespace slambench {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::SizeMismatch: return "SizeMismatch";
    case Errc::DegenerateGeometry: return "DegenerateGeometry";
    case Errc::UnsortedFrames: return "UnsortedFrames";
    case Errc::PayloadSizeMismatch: return "PayloadSizeMismatch";
    case Errc::BadSensorIndex: return "BadSensorIndex";
    case Errc::IoFailure: return "IoFailure";
    case Errc::BadMagicOrVersion: return "BadMagicOrVersion";
    case Errc::TruncatedFile: return "TruncatedFile";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::UnsupportedSensor: return "UnsupportedSensor";
    case Errc::MissingListFile: return "MissingListFile";
    case Errc::UnparseableLine: return "UnparseableLine";
    case Errc::MissingRaster: return "MissingRaster";
    case Errc::MalformedPointCloud: return "MalformedPointCloud";
    case Errc::BadCsvHeader: return "BadCsvHeader";
    case Errc::InvalidConfig: return "InvalidConfig";
    case Errc::DuplicateParameter: return "DuplicateParameter";
    case Errc::UnknownParameter: return "UnknownParameter";
    case Errc::ParameterOutOfBounds: return "ParameterOutOfBounds";
    case Errc::ParameterNotLive: return "ParameterNotLive";
    case Errc::LifecycleViolation: return "LifecycleViolation";
    case Errc::ContractViolation: return "ContractViolation";
    case Errc::MissingSymbol: return "MissingSymbol";
    case Errc::ApiVersionMismatch: return "ApiVersionMismatch";
    case Errc::LoadFailure: return "LoadFailure";
    case Errc::EmptyPairs: return "EmptyPairs";
    case Errc::InsufficientPairs: return "InsufficientPairs";
    case Errc::NoCorrespondences: return "NoCorrespondences";
    case Errc::ProbeUnavailable: return "ProbeUnavailable";
    case Errc::NoValidSamples: return "NoValidSamples";
    case Errc::NameCollision: return "NameCollision";
    case Errc::SessionNotFound: return "SessionNotFound";
  }
  return "Unknown";
}

}  // namespace slambench
