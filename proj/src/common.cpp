#include "tfdf/common.hpp"

namespace tfdf {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonPositiveBandwidth: return "NonPositiveBandwidth";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::InvalidNeighborCount: return "InvalidNeighborCount";
    case ErrorCode::ZeroRow: return "ZeroRow";
    case ErrorCode::AsymmetricInput: return "AsymmetricInput";
    case ErrorCode::EmptyDomain: return "EmptyDomain";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::UnknownParameter: return "UnknownParameter";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvalidTask: return "InvalidTask";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

ErrorCategory category_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::UnknownParameter:
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidNeighborCount:
    case ErrorCode::NonPositiveBandwidth:
      return ErrorCategory::Config;
    case ErrorCode::SingularSystem:
    case ErrorCode::NonFiniteIterate:
      return ErrorCategory::Numerical;
    default:
      return ErrorCategory::Data;
  }
}

}  // namespace tfdf
