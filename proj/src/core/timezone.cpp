#include "sandbox/core/timezone.hpp"

#include <array>

#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"

namespace sandbox {
namespace {

using namespace std::chrono;

struct ZoneRule {
  std::string_view name;
  int standard_offset_hours;  // east of UTC
  bool observes_dst;
};

constexpr std::array<ZoneRule, 7> kZones = {{
    {"America/New_York", -5, true},
    {"America/Chicago", -6, true},
    {"America/Denver", -7, true},
    {"America/Phoenix", -7, false},
    {"America/Los_Angeles", -8, true},
    {"America/Anchorage", -9, true},
    {"Pacific/Honolulu", -10, false},
}};

struct StateZone {
  std::string_view code;
  std::string_view name;
  std::string_view zone;
};

// One zone per state: the zone covering the state's largest population.
constexpr StateZone kStates[] = {
    {"AL", "alabama", "America/Chicago"},        {"AK", "alaska", "America/Anchorage"},
    {"AZ", "arizona", "America/Phoenix"},        {"AR", "arkansas", "America/Chicago"},
    {"CA", "california", "America/Los_Angeles"}, {"CO", "colorado", "America/Denver"},
    {"CT", "connecticut", "America/New_York"},   {"DE", "delaware", "America/New_York"},
    {"DC", "district of columbia", "America/New_York"},
    {"FL", "florida", "America/New_York"},       {"GA", "georgia", "America/New_York"},
    {"HI", "hawaii", "Pacific/Honolulu"},        {"ID", "idaho", "America/Denver"},
    {"IL", "illinois", "America/Chicago"},       {"IN", "indiana", "America/New_York"},
    {"IA", "iowa", "America/Chicago"},           {"KS", "kansas", "America/Chicago"},
    {"KY", "kentucky", "America/New_York"},      {"LA", "louisiana", "America/Chicago"},
    {"ME", "maine", "America/New_York"},         {"MD", "maryland", "America/New_York"},
    {"MA", "massachusetts", "America/New_York"}, {"MI", "michigan", "America/New_York"},
    {"MN", "minnesota", "America/Chicago"},      {"MS", "mississippi", "America/Chicago"},
    {"MO", "missouri", "America/Chicago"},       {"MT", "montana", "America/Denver"},
    {"NE", "nebraska", "America/Chicago"},       {"NV", "nevada", "America/Los_Angeles"},
    {"NH", "new hampshire", "America/New_York"}, {"NJ", "new jersey", "America/New_York"},
    {"NM", "new mexico", "America/Denver"},      {"NY", "new york", "America/New_York"},
    {"NC", "north carolina", "America/New_York"}, {"ND", "north dakota", "America/Chicago"},
    {"OH", "ohio", "America/New_York"},          {"OK", "oklahoma", "America/Chicago"},
    {"OR", "oregon", "America/Los_Angeles"},     {"PA", "pennsylvania", "America/New_York"},
    {"RI", "rhode island", "America/New_York"},  {"SC", "south carolina", "America/New_York"},
    {"SD", "south dakota", "America/Chicago"},   {"TN", "tennessee", "America/Chicago"},
    {"TX", "texas", "America/Chicago"},          {"UT", "utah", "America/Denver"},
    {"VT", "vermont", "America/New_York"},       {"VA", "virginia", "America/New_York"},
    {"WA", "washington", "America/Los_Angeles"}, {"WV", "west virginia", "America/New_York"},
    {"WI", "wisconsin", "America/Chicago"},      {"WY", "wyoming", "America/Denver"},
};

const ZoneRule& find_zone(std::string_view zone) {
  for (const auto& z : kZones) {
    if (z.name == zone) return z;
  }
  throw Error(ErrorCode::OutOfRange, "unsupported time zone \"" + std::string(zone) + "\"");
}

// Second Sunday of March and first Sunday of November, 02:00 local.
local_seconds dst_start(year y) { return local_days{y / March / Sunday[2]} + 2h; }
local_seconds dst_end(year y) { return local_days{y / November / Sunday[1]} + 2h; }

}  // namespace

std::optional<std::string> zone_for_state(std::string_view state) {
  std::string key = to_lower(trim(state));
  for (const auto& s : kStates) {
    if (to_lower(s.code) == key || s.name == key) return std::string(s.zone);
  }
  return std::nullopt;
}

bool is_supported_zone(std::string_view zone) {
  for (const auto& z : kZones) {
    if (z.name == zone) return true;
  }
  return false;
}

UtcDateTime to_utc(LocalDateTime local, std::string_view zone) {
  const auto& rule = find_zone(zone);
  auto offset = hours{rule.standard_offset_hours};
  if (rule.observes_dst) {
    year y = year_month_day{floor<days>(local)}.year();
    // Daylight time runs from 02:00 standard in March to 02:00 daylight
    // (01:00 standard) in November; the repeated hour counts as daylight.
    if (local >= dst_start(y) + 1h && local < dst_end(y)) offset += 1h;
  }
  return UtcDateTime{local.time_since_epoch() - offset};
}

LocalDateTime to_local(UtcDateTime utc, std::string_view zone) {
  const auto& rule = find_zone(zone);
  auto standard = LocalDateTime{utc.time_since_epoch() + hours{rule.standard_offset_hours}};
  if (!rule.observes_dst) return standard;
  year y = year_month_day{floor<days>(standard)}.year();
  // In standard-time terms daylight time covers [start, end - 1h).
  if (standard >= dst_start(y) && standard < dst_end(y) - 1h) return standard + 1h;
  return standard;
}

}  // namespace sandbox
