#include "rigidcal/error.hpp"

namespace rigidcal {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::InsufficientInliers: return "InsufficientInliers";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::AmbiguousAxis: return "AmbiguousAxis";
    case ErrorCode::OrderMismatch: return "OrderMismatch";
    case ErrorCode::UnknownTool: return "UnknownTool";
    case ErrorCode::InvalidDecomposition: return "InvalidDecomposition";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

}  // namespace rigidcal
