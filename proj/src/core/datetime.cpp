#include "sandbox/core/datetime.hpp"

#include <charconv>
#include <cstdio>

namespace sandbox {
namespace {

using namespace std::chrono;

// Reads exactly `width` digits at `pos`.
bool read_number(std::string_view text, std::size_t pos, std::size_t width, int& out) {
  if (pos + width > text.size()) return false;
  for (std::size_t i = pos; i < pos + width; ++i) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + pos + width, out);
  return ec == std::errc{};
}

std::string_view strip(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t')) text.remove_suffix(1);
  return text;
}

}  // namespace

std::optional<Date> parse_date(std::string_view text) {
  text = strip(text);
  int y, m, d;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  if (!read_number(text, 0, 4, y) || !read_number(text, 5, 2, m) || !read_number(text, 8, 2, d))
    return std::nullopt;
  Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::optional<Date> parse_us_date(std::string_view text) {
  text = strip(text);
  int y, m, d;
  if (text.size() != 10 || text[2] != '/' || text[5] != '/') return std::nullopt;
  if (!read_number(text, 0, 2, m) || !read_number(text, 3, 2, d) || !read_number(text, 6, 4, y))
    return std::nullopt;
  Date date{year{y}, month{static_cast<unsigned>(m)}, day{static_cast<unsigned>(d)}};
  if (!date.ok()) return std::nullopt;
  return date;
}

std::string format_us_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02u/%02u/%04d", static_cast<unsigned>(d.month()),
                static_cast<unsigned>(d.day()), static_cast<int>(d.year()));
  return buf;
}

std::optional<LocalDateTime> parse_datetime(std::string_view text) {
  text = strip(text);
  if (text.size() != 19 || (text[10] != ' ' && text[10] != 'T')) return std::nullopt;
  auto date = parse_date(text.substr(0, 10));
  if (!date) return std::nullopt;
  int h, mi, s;
  if (text[13] != ':' || text[16] != ':') return std::nullopt;
  if (!read_number(text, 11, 2, h) || !read_number(text, 14, 2, mi) ||
      !read_number(text, 17, 2, s))
    return std::nullopt;
  if (h > 23 || mi > 59 || s > 59) return std::nullopt;
  return local_days{*date} + hours{h} + minutes{mi} + seconds{s};
}

std::string format_datetime(LocalDateTime t) {
  auto day_start = floor<days>(t);
  hh_mm_ss hms{t - day_start};
  char buf[32];
  std::snprintf(buf, sizeof buf, "%s %02d:%02d:%02d", format_date(Date{day_start}).c_str(),
                static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                static_cast<int>(hms.seconds().count()));
  return buf;
}

Date date_of(LocalDateTime t) { return Date{floor<days>(t)}; }

seconds time_of_day(LocalDateTime t) { return t - floor<days>(t); }

LocalDateTime at(Date d, seconds since_midnight) { return local_days{d} + since_midnight; }

bool DateRange::valid() const {
  return start.ok() && end.ok() && local_days{start} <= local_days{end} &&
         days() <= kMaxRangeDays;
}

int DateRange::days() const {
  return static_cast<int>((local_days{end} - local_days{start}).count()) + 1;
}

bool DateRange::contains(Date d) const {
  return local_days{start} <= local_days{d} && local_days{d} <= local_days{end};
}

std::vector<Date> DateRange::each_day() const {
  std::vector<Date> out;
  for (auto d = local_days{start}; d <= local_days{end}; d += std::chrono::days{1}) {
    out.emplace_back(d);
  }
  return out;
}

}  // namespace sandbox
