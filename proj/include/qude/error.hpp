#pragma once

#include <stdexcept>
#include <string>

namespace qude {

enum class ErrorCode {
  InvalidDimension,
  InvalidArgument,
  ContractViolation,
  DegenerateSpectrum,
  InvalidState,
  InvalidConfiguration,
  Divergence,
  UnphysicalRate,
  GradientFailure,
  UnsupportedAnsatz,
  ConfigError,
  IoError,
};

const char* to_string(ErrorCode code);

/// Single exception type for the toolkit; the code classifies the failure so
/// the command line can map it onto an exit status.
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

}  // namespace qude
