#include "poseforge/error.hpp"

namespace poseforge {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BehindCamera: return "BehindCamera";
    case ErrorKind::DegenerateAxis: return "DegenerateAxis";
    case ErrorKind::InvalidRotation: return "InvalidRotation";
    case ErrorKind::DuplicateId: return "DuplicateId";
    case ErrorKind::UnknownObject: return "UnknownObject";
    case ErrorKind::OutOfRange: return "OutOfRange";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::MissingPose: return "MissingPose";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorKind::LayoutError: return "LayoutError";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::EmptyMesh: return "EmptyMesh";
    case ErrorKind::NoRecords: return "NoRecords";
    case ErrorKind::MissingTrials: return "MissingTrials";
    case ErrorKind::SessionComplete: return "SessionComplete";
    case ErrorKind::InvalidCommand: return "InvalidCommand";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace poseforge
