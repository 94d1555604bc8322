#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace forge {

enum class ErrorCode {
  // Validation (CLI exit code 2)
  MalformedLine,
  DuplicateId,
  SchemaViolation,
  TargetTooLarge,
  EmptyStratum,
  InvalidArgument,
  UnknownBill,
  UnknownSponsor,
  AgentIdCollision,
  AnchorMissing,
  LengthMismatch,
  TooFewPoints,
  DimMismatch,
  ZeroVector,
  BadOrdinals,
  MissingPosition,
  MismatchedQuintuplets,
  NoOverlap,
  TooFewGroups,
  TinyGroup,
  EmptyField,
  WrongArity,
  MissingDataset,
  MissingDependency,
  // Runtime (CLI exit code 3)
  IoFailure,
  DegenerateMatrix,
  ZeroSpread,
  ZeroStd,
  CacheMiss,
  OracleUnreachable,
  OracleBadResponse,
  PartialBatch,
  TaggerUnavailable,
  DigestMismatch,
};

std::string_view error_code_name(ErrorCode code) noexcept;

/// True for errors caused by bad input rather than by the environment.
bool is_validation_error(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail);

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

/// Error carrying the 1-based line number of a JSONL input.
class LineError : public Error {
 public:
  LineError(ErrorCode code, std::size_t line_no, const std::string& detail);

  std::size_t line_no() const noexcept { return line_no_; }

 private:
  std::size_t line_no_;
};

}  // namespace forge
