#pragma once

#include <stdexcept>
#include <string>

namespace rigidcal {

enum class ErrorCode {
  EmptyInput,
  DegenerateInput,
  InsufficientInliers,
  LengthMismatch,
  AmbiguousAxis,
  OrderMismatch,
  UnknownTool,
  InvalidDecomposition,
  InvalidArgument,
  ParseError,
};

const char* to_string(ErrorCode code);

// Single exception type for the library; `code()` drives the CLI exit status.
class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

  ErrorCode code() const noexcept { return code_; }
  // Message without the code prefix, for re-tagging with more context.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCode code_;
  std::string detail_;
};

}  // namespace rigidcal
