#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace sandbox {

// Calendar date and naive local wall-clock time (no zone attached).
using Date = std::chrono::year_month_day;
using LocalDateTime = std::chrono::local_seconds;
using UtcDateTime = std::chrono::sys_seconds;

/// Parses "YYYY-MM-DD HH:MM:SS" (a 'T' separator is also accepted).
std::optional<LocalDateTime> parse_datetime(std::string_view text);
std::string format_datetime(LocalDateTime t);

std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

/// MM/DD/YYYY, the birthday rendering used by persona descriptions.
std::optional<Date> parse_us_date(std::string_view text);
std::string format_us_date(Date d);

Date date_of(LocalDateTime t);
std::chrono::seconds time_of_day(LocalDateTime t);
LocalDateTime at(Date d, std::chrono::seconds since_midnight);

/// Inclusive calendar date range.
struct DateRange {
  Date start;
  Date end;

  bool valid() const;
  int days() const;
  bool contains(Date d) const;
  std::vector<Date> each_day() const;

  bool operator==(const DateRange&) const = default;
};

inline constexpr int kMaxRangeDays = 14;

}  // namespace sandbox
