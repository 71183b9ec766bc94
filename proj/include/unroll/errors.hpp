#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace unroll {

enum class ErrorCode {
  DimensionMismatch,
  SingularMatrix,
  NotSymmetric,
  NoConvergence,
  NonFiniteValue,
  NonFiniteIterate,
  NoTape,
  IndexOutOfRange,
  EmptySeries,
  NotAContraction,
  InvalidRange,
  InvalidArgument,
  DegenerateObjective,
  MismatchedConfig,
  EmptyGroup,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Every failure in the library is reported as an Error carrying a code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace unroll
