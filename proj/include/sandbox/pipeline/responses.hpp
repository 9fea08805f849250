#pragma once

#include <string_view>
#include <vector>

#include "sandbox/core/types.hpp"

namespace sandbox {

// Parsers for raw stage responses. Each throws ParseFailed when the text
// cannot be read as the expected structure; constraint checks happen later.

/// Accepts [[start, end, "Label - address"]], [[start, end, label, address]]
/// or [{"start time", "end time", "event"[, "address"]}], optionally wrapped
/// in an object under "location_history" or "schedule". Result is sorted.
std::vector<ScheduleEvent> parse_schedule_response(std::string_view text);

/// Accepts [[datetime, title, url]] or objects with datetime/title/url,
/// optionally under "browser_history". Result is sorted ascending.
std::vector<BrowsingEntry> parse_browsing_response(std::string_view text);

struct PostDraft {
  LocalDateTime posted_at;
  std::string address;
  std::string content;
  std::optional<GeoPoint> location;
  std::string timezone;
  std::string locale;
};

/// Accepts [{"time", "address", "content", ...}] or [[time, content, address]],
/// optionally under "posts". Result is sorted by time.
std::vector<PostDraft> parse_posts_response(std::string_view text);

/// Device/browser/user-agent triple from JSON, "Browser: X" lines or
/// "X on a Y" prose. A user agent found in the text is kept verbatim;
/// otherwise one is composed from the template table.
DeviceEnvironment parse_device_response(std::string_view text);

}  // namespace sandbox
