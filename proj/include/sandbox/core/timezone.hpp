#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "sandbox/core/datetime.hpp"

namespace sandbox {

/// IANA zone for a US state (two-letter code or full name). Unknown states
/// yield std::nullopt.
std::optional<std::string> zone_for_state(std::string_view state);

/// Converts a naive local time to UTC in one of the supported US zones
/// (standard offset plus the 2007+ US daylight-saving rule). A local time
/// skipped by spring-forward is read as standard time; a repeated fall-back
/// time resolves to its first (daylight) occurrence. Throws OutOfRange for
/// an unsupported zone.
UtcDateTime to_utc(LocalDateTime local, std::string_view zone);
LocalDateTime to_local(UtcDateTime utc, std::string_view zone);

bool is_supported_zone(std::string_view zone);

}  // namespace sandbox
