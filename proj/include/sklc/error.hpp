#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sklc {

enum class ErrorCode {
  InvalidConfig,
  EmptyVocabulary,
  EmptyDocument,
  InsufficientData,
  InsufficientClasses,
  DimensionMismatch,
  NonPositiveEntry,
  ZeroVector,
  Stalled,
  MaxIters,
  BracketFailure,
  UnknownLabel,
  VersionMismatch,
  SchemaError,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptyVocabulary: return "EmptyVocabulary";
    case ErrorCode::EmptyDocument: return "EmptyDocument";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::InsufficientClasses: return "InsufficientClasses";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonPositiveEntry: return "NonPositiveEntry";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::Stalled: return "Stalled";
    case ErrorCode::MaxIters: return "MaxIters";
    case ErrorCode::BracketFailure: return "BracketFailure";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Every failure raised by the library. The message is prefixed with the
/// error code name so it can be printed as-is.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail),
        code_(code),
        detail_(detail) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace sklc
