#pragma once

#include <stdexcept>
#include <string>

namespace bbx {

enum class ErrorCode {
  NonPositiveDepth,
  SingularSystem,
  MissingAttitude,
  ZeroVector,
  NonPositiveAngle,
  InsufficientObservations,
  FreeFall,
  EmptyTrace,
  InvalidArgument,
  Parse,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositiveDepth: return "NonPositiveDepth";
    case ErrorCode::SingularSystem: return "SingularSystem";
    case ErrorCode::MissingAttitude: return "MissingAttitude";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonPositiveAngle: return "NonPositiveAngle";
    case ErrorCode::InsufficientObservations: return "InsufficientObservations";
    case ErrorCode::FreeFall: return "FreeFall";
    case ErrorCode::EmptyTrace: return "EmptyTrace";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
  }
  return "Unknown";
}

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace bbx
