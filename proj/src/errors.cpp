#include "unroll/errors.hpp"

namespace unroll {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonFiniteIterate: return "NonFiniteIterate";
    case ErrorCode::NoTape: return "NoTape";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::NotAContraction: return "NotAContraction";
    case ErrorCode::InvalidRange: return "InvalidRange";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DegenerateObjective: return "DegenerateObjective";
    case ErrorCode::MismatchedConfig: return "MismatchedConfig";
    case ErrorCode::EmptyGroup: return "EmptyGroup";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

}  // namespace unroll
