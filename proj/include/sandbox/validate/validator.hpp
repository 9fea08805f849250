#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sandbox/core/types.hpp"

namespace sandbox {

enum class ViolationCode {
  ScheduleGap,
  ScheduleOverlap,
  DayBoundsMissing,
  NightBrowsing,
  ZeroSeconds,
  DuplicateTimestamp,
  PostLocationMismatch,
  PostOverlength,
  ImageCountExceeded,
  AgeOutOfRange,
  BirthdayAgeMismatch,
  BrowsingOutsideRange,
};

enum class Severity { Hard, Advisory };

/// Fixed table: every code is hard except PostLocationMismatch.
Severity severity_of(ViolationCode code);

std::string_view to_string(ViolationCode code);
std::string_view to_string(Severity severity);
std::optional<ViolationCode> parse_violation_code(std::string_view name);

struct Violation {
  ViolationCode code;
  Severity severity;
  std::string subject;  // path into the persona document, e.g. "browsing[3]"
  std::string message;

  bool operator==(const Violation&) const = default;
};

/// Browsing is forbidden in [00:00:00, 07:00:00).
inline constexpr std::chrono::seconds kNightWindowEnd{7 * 3600};
inline constexpr std::chrono::seconds kDayLastSecond{23 * 3600 + 59 * 60 + 59};

/// Per start date: the first event starts at 00:00:00, the last ends at
/// 23:59:59, and consecutive events neither leave a gap nor overlap.
std::vector<Violation> validate_schedule(std::span<const ScheduleEvent> events);

/// When `range` is absent it is taken from the schedule's first and last
/// dates; with neither, range checks are skipped.
std::vector<Violation> validate_browsing(std::span<const BrowsingEntry> entries,
                                         std::span<const ScheduleEvent> schedule,
                                         std::optional<DateRange> range);

std::vector<Violation> validate_posts(std::span<const SocialPost> posts,
                                      std::span<const ScheduleEvent> schedule);

std::vector<Violation> validate_persona(const PersonaProfile& persona);

bool has_hard_violation(std::span<const Violation> violations);

/// Case-insensitive token comparison of the street lines (text before the
/// first comma, event label removed). Matches when one token set contains
/// the other.
bool street_lines_match(std::string_view a, std::string_view b);

/// One violation per line: code<TAB>severity<TAB>subject<TAB>message.
std::string format_violation_report(std::span<const Violation> violations);
std::vector<Violation> parse_violation_report(std::string_view text);

}  // namespace sandbox
