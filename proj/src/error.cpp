#include "far/error.hpp"

namespace far {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSupport: return "InvalidSupport";
    case ErrorCode::GridTooSmall: return "GridTooSmall";
    case ErrorCode::GridMismatch: return "GridMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NonPSD: return "NonPSD";
    case ErrorCode::NegativeDensity: return "NegativeDensity";
    case ErrorCode::TooFewObservations: return "TooFewObservations";
    case ErrorCode::DegenerateSample: return "DegenerateSample";
    case ErrorCode::BandwidthNonpositive: return "BandwidthNonpositive";
    case ErrorCode::EmptyPanel: return "EmptyPanel";
    case ErrorCode::TooFewPeriods: return "TooFewPeriods";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::EmptyResiduals: return "EmptyResiduals";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::ThresholdOutOfSupport: return "ThresholdOutOfSupport";
    case ErrorCode::DegenerateForecast: return "DegenerateForecast";
    case ErrorCode::NoFeasibleK: return "NoFeasibleK";
    case ErrorCode::TooFewResiduals: return "TooFewResiduals";
    case ErrorCode::TooManyFailures: return "TooManyFailures";
    case ErrorCode::DegenerateDensity: return "DegenerateDensity";
    case ErrorCode::UnstableGenerator: return "UnstableGenerator";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidSupport:
    case ErrorCode::GridTooSmall:
    case ErrorCode::GridMismatch:
    case ErrorCode::ThresholdOutOfSupport:
    case ErrorCode::ParseError:
    case ErrorCode::EmptyFile:
    case ErrorCode::FormatError:
    case ErrorCode::IoError:
      return true;
    default:
      return false;
  }
}

}  // namespace far
