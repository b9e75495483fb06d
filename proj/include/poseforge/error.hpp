#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace poseforge {

enum class ErrorKind {
  BehindCamera,
  DegenerateAxis,
  InvalidRotation,
  DuplicateId,
  UnknownObject,
  OutOfRange,
  OutOfBounds,
  MissingPose,
  DimensionMismatch,
  ParseError,
  UnsupportedFormat,
  LayoutError,
  VersionMismatch,
  EmptyMesh,
  NoRecords,
  MissingTrials,
  SessionComplete,
  InvalidCommand,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every recoverable failure in the library is reported through this type so
// callers (and the fuzz harness) can rely on a single catch site.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace poseforge
