#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qcut {

enum class ErrorCode {
  IndexOutOfRange,
  ArityMismatch,
  UnboundParameter,
  ParseError,
  UnsupportedOp,
  BadPauliString,
  UncuttableGate,
  TooManyCuts,
  BadRange,
  DimMismatch,
  HeadConfigInvalid,
  EmptyDataset,
  AssetCorrupt,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "INDEX_OUT_OF_RANGE";
    case ErrorCode::ArityMismatch: return "ARITY_MISMATCH";
    case ErrorCode::UnboundParameter: return "UNBOUND_PARAMETER";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::UnsupportedOp: return "UNSUPPORTED_OP";
    case ErrorCode::BadPauliString: return "BAD_PAULI_STRING";
    case ErrorCode::UncuttableGate: return "UNCUTTABLE_GATE";
    case ErrorCode::TooManyCuts: return "TOO_MANY_CUTS";
    case ErrorCode::BadRange: return "BAD_RANGE";
    case ErrorCode::DimMismatch: return "DIM_MISMATCH";
    case ErrorCode::HeadConfigInvalid: return "HEAD_CONFIG_INVALID";
    case ErrorCode::EmptyDataset: return "EMPTY_DATASET";
    case ErrorCode::AssetCorrupt: return "ASSET_CORRUPT";
    case ErrorCode::IoError: return "IO_ERROR";
  }
  return "UNKNOWN";
}

/// Exception carrying one of the library's error codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qcut
