#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>

#include "sandbox/core/datetime.hpp"
#include "sandbox/core/error.hpp"
#include "sandbox/core/types.hpp"

namespace sandbox {

/// Microseconds since 1601-01-01T00:00:00Z, the browser history time base.
/// Throws OutOfRange for earlier instants.
std::int64_t to_webkit_timestamp(UtcDateTime instant);
UtcDateTime from_webkit_timestamp(std::int64_t micros);

// PAGE_TRANSITION_TYPED | CHAIN_START | CHAIN_END
inline constexpr std::int64_t kTypedTransition = 0x30000001;

/// Writes a fresh history database (urls + visits tables) at `path`,
/// replacing any existing file. Local visit times are converted to UTC in
/// `zone`. Returns the number of visits written. Throws ValidationFailed
/// when the entries carry hard violations, IoFailure on write errors.
std::size_t write_history_db(std::span<const BrowsingEntry> entries, std::string_view zone,
                             const std::filesystem::path& path);

}  // namespace sandbox
