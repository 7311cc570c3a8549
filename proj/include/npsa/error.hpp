#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace npsa {

enum class ErrorCode {
  ShapeMismatch,
  NotSymmetric,
  NoConvergence,
  RankDeficient,
  NotUnit,
  DegenerateData,
  EmptyData,
  ZeroContraction,
  DimensionTooLarge,
  UnsupportedDimension,
  DegenerateRowOrColumn,
  ZeroVector,
  MalformedHeader,
  TruncatedData,
  MissingKey,
  UnsupportedDataType,
  SizeMismatch,
  IoError,
  Validation,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NotUnit: return "NotUnit";
    case ErrorCode::DegenerateData: return "DegenerateData";
    case ErrorCode::EmptyData: return "EmptyData";
    case ErrorCode::ZeroContraction: return "ZeroContraction";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
    case ErrorCode::DegenerateRowOrColumn: return "DegenerateRowOrColumn";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::MalformedHeader: return "MalformedHeader";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::MissingKey: return "MissingKey";
    case ErrorCode::UnsupportedDataType: return "UnsupportedDataType";
    case ErrorCode::SizeMismatch: return "SizeMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Validation: return "Validation";
  }
  return "Unknown";
}

/// Every failure raised by the library carries a machine-checkable code; the
/// message is prefixed with the code name so CLI output names it too.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace npsa
