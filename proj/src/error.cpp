#include "forge/error.hpp"

namespace forge {

std::string_view error_code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedLine: return "MalformedLine";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::TargetTooLarge: return "TargetTooLarge";
    case ErrorCode::EmptyStratum: return "EmptyStratum";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::UnknownBill: return "UnknownBill";
    case ErrorCode::UnknownSponsor: return "UnknownSponsor";
    case ErrorCode::AgentIdCollision: return "AgentIdCollision";
    case ErrorCode::AnchorMissing: return "AnchorMissing";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::BadOrdinals: return "BadOrdinals";
    case ErrorCode::MissingPosition: return "MissingPosition";
    case ErrorCode::MismatchedQuintuplets: return "MismatchedQuintuplets";
    case ErrorCode::NoOverlap: return "NoOverlap";
    case ErrorCode::TooFewGroups: return "TooFewGroups";
    case ErrorCode::TinyGroup: return "TinyGroup";
    case ErrorCode::EmptyField: return "EmptyField";
    case ErrorCode::WrongArity: return "WrongArity";
    case ErrorCode::MissingDataset: return "MissingDataset";
    case ErrorCode::MissingDependency: return "MissingDependency";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::DegenerateMatrix: return "DegenerateMatrix";
    case ErrorCode::ZeroSpread: return "ZeroSpread";
    case ErrorCode::ZeroStd: return "ZeroStd";
    case ErrorCode::CacheMiss: return "CacheMiss";
    case ErrorCode::OracleUnreachable: return "OracleUnreachable";
    case ErrorCode::OracleBadResponse: return "OracleBadResponse";
    case ErrorCode::PartialBatch: return "PartialBatch";
    case ErrorCode::TaggerUnavailable: return "TaggerUnavailable";
    case ErrorCode::DigestMismatch: return "DigestMismatch";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) noexcept {
  return static_cast<int>(code) < static_cast<int>(ErrorCode::IoFailure);
}

Error::Error(ErrorCode code, const std::string& detail)
    : std::runtime_error(std::string(error_code_name(code)) + "(" + detail + ")"),
      code_(code),
      detail_(detail) {}

LineError::LineError(ErrorCode code, std::size_t line_no, const std::string& detail)
    : Error(code, "line " + std::to_string(line_no) + ": " + detail), line_no_(line_no) {}

}  // namespace forge
