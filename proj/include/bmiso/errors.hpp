#pragma once

#include <stdexcept>
#include <string>

namespace bmiso {

enum class ErrorCode {
  NoPointLeftOfOrigin,
  IntervalOutsideWindow,
  LengthMismatch,
  DomainError,
  InsufficientWindow,
  InfeasibleDuration,
  PathInfeasible,
  SupportMismatch,
  NoRhoIntervalInWindow,
  IllegalTransition,
  NoMarkerInWindow,
  MissingUcode,
  NonRationalScale,
  GridIncompatible,
  NotIrreducible,
  EmptySample,
  TooFewSamples,
  ConfigError,
  DecodeError,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoPointLeftOfOrigin: return "NoPointLeftOfOrigin";
    case ErrorCode::IntervalOutsideWindow: return "IntervalOutsideWindow";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::InsufficientWindow: return "InsufficientWindow";
    case ErrorCode::InfeasibleDuration: return "InfeasibleDuration";
    case ErrorCode::PathInfeasible: return "PathInfeasible";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::NoRhoIntervalInWindow: return "NoRhoIntervalInWindow";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::NoMarkerInWindow: return "NoMarkerInWindow";
    case ErrorCode::MissingUcode: return "MissingUcode";
    case ErrorCode::NonRationalScale: return "NonRationalScale";
    case ErrorCode::GridIncompatible: return "GridIncompatible";
    case ErrorCode::NotIrreducible: return "NotIrreducible";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::DecodeError: return "DecodeError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(error_name(code)) + ": " + detail),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& detail) {
  throw Error(code, detail);
}

inline void require(bool ok, ErrorCode code, const std::string& detail) {
  if (!ok) fail(code, detail);
}

}  // namespace bmiso
