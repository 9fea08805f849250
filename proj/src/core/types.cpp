#include "sandbox/core/types.hpp"

#include <cctype>

#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"

namespace sandbox {

void check_guidance(const GenerationGuidance& guidance) {
  const auto& range = guidance.date_range;
  require(range.start.ok() && range.end.ok(), "guidance date range has an invalid date");
  require(std::chrono::local_days{range.start} <= std::chrono::local_days{range.end},
          "guidance date range is empty (start after end)");
  require(range.days() <= kMaxRangeDays, "guidance date range exceeds 14 days");
  require(guidance.browsing_entries_per_day >= 1, "browsing_entries_per_day must be >= 1");
  require(guidance.posts_total >= 1, "posts_total must be >= 1");
}

bool GeoPoint::valid() const {
  return latitude >= -90.0 && latitude <= 90.0 && longitude >= -180.0 && longitude <= 180.0;
}

std::string PrivacyAttributes::home_address() const {
  return street + ", " + city + ", " + state + " " + zip_code;
}

bool user_agent_mentions(std::string_view user_agent, std::string_view browser) {
  if (browser.empty() || user_agent.empty()) return false;
  if (contains_icase(user_agent, browser)) return true;
  struct Alias {
    std::string_view keyword;
    std::string_view token;
  };
  static constexpr Alias kAliases[] = {
      {"edge", "Edg/"},         {"chrome", "Chrome/"},       {"safari", "Safari/"},
      {"firefox", "Firefox/"},  {"opera", "OPR/"},           {"samsung", "SamsungBrowser/"},
      {"brave", "Chrome/"},     {"chromium", "Chrome/"},       {"chrome", "CriOS/"},
      {"firefox", "FxiOS/"},
  };
  for (const auto& alias : kAliases) {
    if (contains_icase(browser, alias.keyword) && user_agent.find(alias.token) != std::string_view::npos)
      return true;
  }
  return false;
}

std::pair<std::string, std::string> split_event_location(std::string_view text) {
  text = trim(text);
  auto pos = text.find(" - ");
  if (pos == std::string_view::npos) return {std::string{}, std::string(text)};
  return {std::string(trim(text.substr(0, pos))), std::string(trim(text.substr(pos + 3)))};
}

std::string join_event_location(const ScheduleEvent& event) {
  if (event.event_label.empty()) return event.address;
  return event.event_label + " - " + event.address;
}

bool has_locality(std::string_view address) {
  auto pos = address.find(',');
  if (pos == std::string_view::npos || pos == 0) return false;
  return !trim(address.substr(pos + 1)).empty();
}

bool is_absolute_url(std::string_view url) {
  auto sep = url.find("://");
  if (sep == std::string_view::npos || sep == 0) return false;
  if (!std::isalpha(static_cast<unsigned char>(url[0]))) return false;
  for (std::size_t i = 0; i < sep; ++i) {
    char c = url[i];
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '+' && c != '-' && c != '.')
      return false;
  }
  auto rest = url.substr(sep + 3);
  auto host = rest.substr(0, rest.find_first_of("/?#"));
  if (host.empty()) return false;
  for (char c : url) {
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

std::string_view to_string(Stage stage) {
  switch (stage) {
    case Stage::Description: return "description";
    case Stage::Attributes: return "attributes";
    case Stage::PortraitPrompt: return "portrait_prompt";
    case Stage::Device: return "device";
    case Stage::Schedule: return "schedule";
    case Stage::Browsing: return "browsing";
    case Stage::Posts: return "posts";
  }
  return "unknown";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (Stage s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

bool PersonaProfile::has_stage(Stage stage) const {
  switch (stage) {
    case Stage::Description: return !description.empty();
    case Stage::Attributes: return attributes.has_value();
    case Stage::PortraitPrompt: return !portrait_prompt.empty();
    case Stage::Device: return device.has_value();
    case Stage::Schedule: return !schedule.empty();
    case Stage::Browsing: return !browsing.empty();
    case Stage::Posts: return !posts.empty();
  }
  return false;
}

void PersonaProfile::clear_stage(Stage stage) {
  switch (stage) {
    case Stage::Description: description.clear(); break;
    case Stage::Attributes: attributes.reset(); break;
    case Stage::PortraitPrompt: portrait_prompt.clear(); break;
    case Stage::Device: device.reset(); break;
    case Stage::Schedule: schedule.clear(); break;
    case Stage::Browsing: browsing.clear(); break;
    case Stage::Posts: posts.clear(); break;
  }
}

}  // namespace sandbox
