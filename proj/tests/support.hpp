#pragma once

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace far::testing {

/// Code of the far::Error thrown by f; InvalidArgument with a failure if none.
template <class F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an exception";
  return ErrorCode::InvalidArgument;
}

}  // namespace far::testing
