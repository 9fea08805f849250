#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sandbox {

enum class ErrorCode {
  PreconditionFailed,
  ProviderUnavailable,
  FixtureMissing,
  NotFound,
  GenerationFailed,
  ParseFailed,
  InvariantViolated,
  OutOfRange,
  IoFailure,
  ValidationFailed,
  EmptyServerList,
  UnmappableValue,
  DriverDisconnected,
  EmptyInput,
  ActiveLocked,
  StageOrderViolated,
  AlreadyActive,
};

std::string_view to_string(ErrorCode code);

// Every failure surfaced by the library carries one of the codes above so
// that the HTTP layer and CLI can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(ErrorCode::PreconditionFailed, message);
}

}  // namespace sandbox
