#pragma once

#include <doctest.h>

#include "unroll/errors.hpp"

namespace testing {

/// Code of the unroll::Error thrown by fn; fails the test if nothing is thrown.
template <typename Fn>
unroll::ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const unroll::Error& e) {
    return e.code();
  }
  FAIL("expected an unroll::Error");
  return unroll::ErrorCode::InvalidArgument;
}

}  // namespace testing
