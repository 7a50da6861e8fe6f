#pragma once

#include <gtest/gtest.h>

#include "sklc/error.hpp"

namespace sklc::testing {

/// Code of the sklc::Error raised by fn; fails the test if none is raised.
template <typename Fn>
ErrorCode code_of(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an sklc::Error";
  return ErrorCode::IoError;
}

}  // namespace sklc::testing
