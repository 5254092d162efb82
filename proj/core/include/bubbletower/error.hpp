#pragma once

#include <stdexcept>
#include <string>

namespace bubbletower {

enum class ErrorCode {
  InvalidArgument,    // precondition violated by the caller
  InconsistentModel,  // f != g g' for a custom model
  OutOfRange,         // window/grid/range outside the represented domain
  NumericalFailure,   // NaN/Inf produced by a scheme
  HypothesisFailed,   // sampled data does not meet a lemma hypothesis
  CapacityExceeded,   // refinement or allocation cap
  Io,                 // file missing or malformed
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorCode::InvalidArgument, what);
}

}  // namespace bubbletower
