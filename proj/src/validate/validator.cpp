#include "sandbox/validate/validator.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "sandbox/core/attributes.hpp"
#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"

namespace sandbox {
namespace {

using std::chrono::seconds;

constexpr std::pair<ViolationCode, std::string_view> kCodeNames[] = {
    {ViolationCode::ScheduleGap, "ScheduleGap"},
    {ViolationCode::ScheduleOverlap, "ScheduleOverlap"},
    {ViolationCode::DayBoundsMissing, "DayBoundsMissing"},
    {ViolationCode::NightBrowsing, "NightBrowsing"},
    {ViolationCode::ZeroSeconds, "ZeroSeconds"},
    {ViolationCode::DuplicateTimestamp, "DuplicateTimestamp"},
    {ViolationCode::PostLocationMismatch, "PostLocationMismatch"},
    {ViolationCode::PostOverlength, "PostOverlength"},
    {ViolationCode::ImageCountExceeded, "ImageCountExceeded"},
    {ViolationCode::AgeOutOfRange, "AgeOutOfRange"},
    {ViolationCode::BirthdayAgeMismatch, "BirthdayAgeMismatch"},
    {ViolationCode::BrowsingOutsideRange, "BrowsingOutsideRange"},
};

Violation make(ViolationCode code, std::string subject, std::string message) {
  return Violation{code, severity_of(code), std::move(subject), std::move(message)};
}

std::string indexed(std::string_view section, std::size_t i) {
  return std::string(section) + "[" + std::to_string(i) + "]";
}

bool zero_seconds(LocalDateTime t) { return time_of_day(t).count() % 60 == 0; }

std::set<std::string> street_tokens(std::string_view address) {
  auto [label, rest] = split_event_location(address);
  std::string_view street = rest;
  street = street.substr(0, street.find(','));
  std::set<std::string> tokens;
  std::string current;
  for (char c : street) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    } else if (!current.empty()) {
      tokens.insert(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.insert(std::move(current));
  return tokens;
}

}  // namespace

Severity severity_of(ViolationCode code) {
  return code == ViolationCode::PostLocationMismatch ? Severity::Advisory : Severity::Hard;
}

std::string_view to_string(ViolationCode code) {
  for (const auto& [c, name] : kCodeNames) {
    if (c == code) return name;
  }
  return "Unknown";
}

std::string_view to_string(Severity severity) {
  return severity == Severity::Hard ? "hard" : "advisory";
}

std::optional<ViolationCode> parse_violation_code(std::string_view name) {
  for (const auto& [c, n] : kCodeNames) {
    if (n == name) return c;
  }
  return std::nullopt;
}

std::vector<Violation> validate_schedule(std::span<const ScheduleEvent> events) {
  std::vector<Violation> out;
  std::vector<std::size_t> order(events.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return events[a].start_time < events[b].start_time;
  });

  std::size_t i = 0;
  while (i < order.size()) {
    const Date day = date_of(events[order[i]].start_time);
    const LocalDateTime day_end = at(day, kDayLastSecond);
    const auto& first = events[order[i]];
    if (time_of_day(first.start_time) != seconds{0}) {
      out.push_back(make(ViolationCode::DayBoundsMissing, indexed("schedule", order[i]),
                         format_date(day) + " starts at " + format_datetime(first.start_time)));
    }
    LocalDateTime reach = first.end_time;
    std::size_t reach_index = order[i];
    std::size_t j = i + 1;
    for (; j < order.size() && date_of(events[order[j]].start_time) == day; ++j) {
      const auto& next = events[order[j]];
      if (next.start_time > reach) {
        out.push_back(make(ViolationCode::ScheduleGap, indexed("schedule", order[j]),
                           "gap from " + format_datetime(reach) + " to " + format_datetime(next.start_time)));
      } else if (next.start_time < reach) {
        out.push_back(make(ViolationCode::ScheduleOverlap, indexed("schedule", order[j]),
                           "starts at " + format_datetime(next.start_time) + " before " +
                               indexed("schedule", reach_index) + " ends at " + format_datetime(reach)));
      }
      if (next.end_time > reach) {
        reach = next.end_time;
        reach_index = order[j];
      }
    }
    if (reach != day_end) {
      out.push_back(make(ViolationCode::DayBoundsMissing, indexed("schedule", reach_index),
                         format_date(day) + " ends at " + format_datetime(reach) + ", expected 23:59:59"));
    }
    i = j;
  }
  return out;
}

std::vector<Violation> validate_browsing(std::span<const BrowsingEntry> entries,
                                         std::span<const ScheduleEvent> schedule,
                                         std::optional<DateRange> range) {
  if (!range && !schedule.empty()) {
    auto [lo, hi] = std::minmax_element(schedule.begin(), schedule.end(),
                                        [](const auto& a, const auto& b) { return a.start_time < b.start_time; });
    range = DateRange{date_of(lo->start_time), date_of(hi->start_time)};
  }
  std::vector<Violation> out;
  std::map<LocalDateTime, std::size_t> first_seen;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    auto subject = indexed("browsing", i);
    if (time_of_day(e.visited_at) < kNightWindowEnd) {
      out.push_back(make(ViolationCode::NightBrowsing, subject,
                         format_datetime(e.visited_at) + " falls in 00:00:00-07:00:00"));
    }
    if (zero_seconds(e.visited_at)) {
      out.push_back(make(ViolationCode::ZeroSeconds, subject, format_datetime(e.visited_at) + " has second 00"));
    }
    auto [it, inserted] = first_seen.emplace(e.visited_at, i);
    if (!inserted) {
      out.push_back(make(ViolationCode::DuplicateTimestamp, subject,
                         "same timestamp as " + indexed("browsing", it->second)));
    }
    if (range && !range->contains(date_of(e.visited_at))) {
      out.push_back(make(ViolationCode::BrowsingOutsideRange, subject,
                         format_datetime(e.visited_at) + " is outside " + format_date(range->start) + ".." +
                             format_date(range->end)));
    }
  }
  return out;
}

bool street_lines_match(std::string_view a, std::string_view b) {
  auto ta = street_tokens(a);
  auto tb = street_tokens(b);
  if (ta.empty() || tb.empty()) return false;
  const auto& small = ta.size() <= tb.size() ? ta : tb;
  const auto& large = ta.size() <= tb.size() ? tb : ta;
  return std::includes(large.begin(), large.end(), small.begin(), small.end());
}

std::vector<Violation> validate_posts(std::span<const SocialPost> posts,
                                      std::span<const ScheduleEvent> schedule) {
  std::vector<Violation> out;
  for (std::size_t i = 0; i < posts.size(); ++i) {
    const auto& p = posts[i];
    auto subject = indexed("posts", i);
    if (auto words = word_count(p.content); words > kMaxPostWords) {
      out.push_back(make(ViolationCode::PostOverlength, subject,
                         std::to_string(words) + " words exceeds " + std::to_string(kMaxPostWords)));
    }
    if (p.images.size() > kMaxImagesPerPost) {
      out.push_back(make(ViolationCode::ImageCountExceeded, subject,
                         std::to_string(p.images.size()) + " images exceeds 2"));
    }
    if (zero_seconds(p.posted_at)) {
      out.push_back(make(ViolationCode::ZeroSeconds, subject, format_datetime(p.posted_at) + " has second 00"));
    }
    bool located = std::any_of(schedule.begin(), schedule.end(), [&](const ScheduleEvent& e) {
      return e.start_time <= p.posted_at && p.posted_at <= e.end_time && street_lines_match(e.address, p.address);
    });
    if (!located) {
      out.push_back(make(ViolationCode::PostLocationMismatch, subject,
                         "no schedule event at \"" + p.address + "\" is active at " + format_datetime(p.posted_at)));
    }
  }
  return out;
}

std::vector<Violation> validate_persona(const PersonaProfile& persona) {
  std::vector<Violation> out;
  if (persona.attributes) {
    for (auto problem : attribute_problems(*persona.attributes)) {
      if (problem == AttributeProblem::AgeOutOfRange) {
        out.push_back(make(ViolationCode::AgeOutOfRange, "attributes.age",
                           "age " + std::to_string(persona.attributes->age) + " is outside 18..70"));
      } else {
        out.push_back(make(ViolationCode::BirthdayAgeMismatch, "attributes.birthday",
                           "birthday " + format_us_date(persona.attributes->birthday) + " does not match age " +
                               std::to_string(persona.attributes->age) + " in 2023"));
      }
    }
  }
  auto append = [&out](std::vector<Violation> more) {
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
  };
  append(validate_schedule(persona.schedule));
  std::optional<DateRange> range;
  if (persona.guidance.date_range.valid()) range = persona.guidance.date_range;
  append(validate_browsing(persona.browsing, persona.schedule, range));
  append(validate_posts(persona.posts, persona.schedule));
  return out;
}

bool has_hard_violation(std::span<const Violation> violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) { return v.severity == Severity::Hard; });
}

std::string format_violation_report(std::span<const Violation> violations) {
  std::string out;
  for (const auto& v : violations) {
    std::string message = v.message;
    std::replace(message.begin(), message.end(), '\t', ' ');
    std::replace(message.begin(), message.end(), '\n', ' ');
    out += std::string(to_string(v.code)) + '\t' + std::string(to_string(v.severity)) + '\t' + v.subject + '\t' +
           message + '\n';
  }
  return out;
}

std::vector<Violation> parse_violation_report(std::string_view text) {
  std::vector<Violation> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (int k = 0; k < 3; ++k) {
      auto tab = line.find('\t', start);
      if (tab == std::string::npos) throw Error(ErrorCode::ParseFailed, "violation line has too few fields");
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    fields.push_back(line.substr(start));
    auto code = parse_violation_code(fields[0]);
    if (!code) throw Error(ErrorCode::ParseFailed, "unknown violation code " + fields[0]);
    Severity severity = fields[1] == "hard" ? Severity::Hard : Severity::Advisory;
    out.push_back(Violation{*code, severity, fields[2], fields[3]});
  }
  return out;
}

}  // namespace sandbox
