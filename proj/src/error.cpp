#include "tailcp/error.hpp"

namespace tailcp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidHermiteRegime: return "InvalidHermiteRegime";
    case ErrorCode::NonPositivePrice: return "NonPositivePrice";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::DegenerateSeries: return "DegenerateSeries";
    case ErrorCode::EmbeddingNotPSD: return "EmbeddingNotPSD";
    case ErrorCode::EmptyGrid: return "EmptyGrid";
    case ErrorCode::NoExceedances: return "NoExceedances";
    case ErrorCode::InsufficientPrefix: return "InsufficientPrefix";
    case ErrorCode::NonPositiveReference: return "NonPositiveReference";
    case ErrorCode::NoAdmissibleK: return "NoAdmissibleK";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::InvalidSpec:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidHermiteRegime:
      return ErrorCategory::Validation;
    case ErrorCode::ParseError:
      return ErrorCategory::Parse;
    case ErrorCode::NotFound:
    case ErrorCode::IoError:
      return ErrorCategory::Io;
    default:
      return ErrorCategory::Domain;
  }
}

}  // namespace tailcp
