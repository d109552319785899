#include "core/error.hpp"

namespace adforge {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::PointAtInfinity: return "PointAtInfinity";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::NotConvex: return "NotConvex";
    case ErrorCode::NoRegion: return "NoRegion";
    case ErrorCode::RegionTooSmall: return "RegionTooSmall";
    case ErrorCode::MissingHeatmap: return "MissingHeatmap";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::MalformedPgm: return "MalformedPgm";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::NoFeatures: return "NoFeatures";
    case ErrorCode::TrackingLost: return "TrackingLost";
    case ErrorCode::EmptyOmega: return "EmptyOmega";
    case ErrorCode::OmegaTouchesBorder: return "OmegaTouchesBorder";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::UnsupportedColorSpace: return "UnsupportedColorSpace";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedFrame: return "TruncatedFrame";
    case ErrorCode::MissingFrameIndex: return "MissingFrameIndex";
    case ErrorCode::UnsupportedPngType: return "UnsupportedPngType";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::NoBillboardFound: return "NoBillboardFound";
    case ErrorCode::QuadOutOfBounds: return "QuadOutOfBounds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace adforge
