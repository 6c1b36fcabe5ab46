#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace formopt {

enum class ErrorCode {
  DimensionMismatch,
  InvalidArgument,
  FormNotHomogeneous,
  MalformedInput,
  EmptyTangent,
  PreconditionNotFonc,
  UnsupportedDimension,
  EmptyInput,
  NumericalFailure,
};

inline constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DIMENSION_MISMATCH";
    case ErrorCode::InvalidArgument: return "INVALID_ARGUMENT";
    case ErrorCode::FormNotHomogeneous: return "FORM_NOT_HOMOGENEOUS";
    case ErrorCode::MalformedInput: return "MALFORMED_INPUT";
    case ErrorCode::EmptyTangent: return "EMPTY_TANGENT";
    case ErrorCode::PreconditionNotFonc: return "PRECONDITION_NOT_FONC";
    case ErrorCode::UnsupportedDimension: return "UNSUPPORTED_DIMENSION";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::NumericalFailure: return "NUMERICAL_FAILURE";
  }
  return "UNKNOWN";
}

/// Every failure raised by the library carries a stable code so the CLI can
/// map it to an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require_dim(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + ": expected length " + std::to_string(want) + ", got " +
                    std::to_string(got));
  }
}

}  // namespace formopt
