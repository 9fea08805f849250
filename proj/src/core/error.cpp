#include "sandbox/core/error.hpp"

namespace sandbox {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionFailed: return "PreconditionFailed";
    case ErrorCode::ProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::FixtureMissing: return "FixtureMissing";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::ParseFailed: return "ParseFailed";
    case ErrorCode::InvariantViolated: return "InvariantViolated";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ValidationFailed: return "ValidationFailed";
    case ErrorCode::EmptyServerList: return "EmptyServerList";
    case ErrorCode::UnmappableValue: return "UnmappableValue";
    case ErrorCode::DriverDisconnected: return "DriverDisconnected";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ActiveLocked: return "ActiveLocked";
    case ErrorCode::StageOrderViolated: return "StageOrderViolated";
    case ErrorCode::AlreadyActive: return "AlreadyActive";
  }
  return "Unknown";
}

}  // namespace sandbox
