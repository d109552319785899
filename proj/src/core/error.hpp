#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace adforge {

// Every failure the engine can report. The C API mirrors these one-to-one.
enum class ErrorCode {
  TooSmall,
  DegenerateConfiguration,
  PointAtInfinity,
  DegenerateHull,
  NotConvex,
  NoRegion,
  RegionTooSmall,
  MissingHeatmap,
  DimensionMismatch,
  MalformedPgm,
  TruncatedData,
  NoFeatures,
  TrackingLost,
  EmptyOmega,
  OmegaTouchesBorder,
  NoConvergence,
  UnsupportedColorSpace,
  MalformedHeader,
  TruncatedFrame,
  MissingFrameIndex,
  UnsupportedPngType,
  SchemaViolation,
  NoBillboardFound,
  QuadOutOfBounds,
  InvalidArgument,
  IoError,
};

std::string_view error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace adforge
