#include "sandbox/pipeline/responses.hpp"

#include <algorithm>
#include <cctype>
#include <initializer_list>

#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"
#include "sandbox/pipeline/lenient_json.hpp"
#include "sandbox/pipeline/user_agents.hpp"

namespace sandbox {
namespace {

[[noreturn]] void parse_error(const std::string& what) { throw Error(ErrorCode::ParseFailed, what); }

const Json* find_any(const Json& object, std::initializer_list<std::string_view> keys) {
  for (auto key : keys) {
    for (auto it = object.begin(); it != object.end(); ++it) {
      if (to_lower(it.key()) == key) return &*it;
    }
  }
  return nullptr;
}

std::string text_of(const Json& value, std::string_view what) {
  if (value.is_string()) return std::string(trim(value.get<std::string>()));
  if (value.is_number()) return value.dump();
  parse_error(std::string(what) + " is not text");
}

std::string required_text(const Json& object, std::initializer_list<std::string_view> keys, std::string_view what) {
  const Json* v = find_any(object, keys);
  if (!v) parse_error("missing " + std::string(what));
  return text_of(*v, what);
}

LocalDateTime required_datetime(const std::string& text, std::string_view what) {
  auto t = parse_datetime(text);
  if (!t) parse_error(std::string(what) + " \"" + text + "\" is not YYYY-MM-DD HH:MM:SS");
  return *t;
}

// Unwraps {"schedule": [...]}-style envelopes.
const Json& list_of(const Json& root, std::initializer_list<std::string_view> wrappers) {
  if (root.is_array()) return root;
  if (root.is_object()) {
    if (const Json* inner = find_any(root, wrappers); inner && inner->is_array()) return *inner;
  }
  parse_error("response is not a list");
}

std::optional<double> number_of(const Json* value) {
  if (!value) return std::nullopt;
  if (value->is_number()) return value->get<double>();
  if (value->is_string()) {
    try {
      return std::stod(value->get<std::string>());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string strip_decoration(std::string_view text) {
  text = trim(text);
  while (!text.empty() && (text.front() == '-' || text.front() == '*' || text.front() == '"' ||
                           text.front() == '`' || text.front() == '\'')) {
    text.remove_prefix(1);
    text = trim(text);
  }
  while (!text.empty() && (text.back() == '*' || text.back() == '"' || text.back() == '`' || text.back() == '\'' ||
                           text.back() == '.' || text.back() == ',')) {
    text.remove_suffix(1);
    text = trim(text);
  }
  return std::string(text);
}

std::string strip_article(std::string text) {
  for (std::string_view article : {"a ", "an ", "the ", "A ", "An ", "The "}) {
    if (text.starts_with(article)) return text.substr(article.size());
  }
  return text;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    out.emplace_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return out;
}

}  // namespace

std::vector<ScheduleEvent> parse_schedule_response(std::string_view text) {
  Json root = parse_lenient_json(text);
  const Json& list = list_of(root, {"location_history", "schedule", "events"});
  std::vector<ScheduleEvent> events;
  for (const auto& row : list) {
    ScheduleEvent e;
    if (row.is_array()) {
      if (row.size() != 3 && row.size() != 4) parse_error("schedule row must have 3 or 4 fields");
      e.start_time = required_datetime(text_of(row[0], "start time"), "start time");
      e.end_time = required_datetime(text_of(row[1], "end time"), "end time");
      if (row.size() == 3) {
        std::tie(e.event_label, e.address) = split_event_location(text_of(row[2], "event"));
      } else {
        e.event_label = text_of(row[2], "event");
        e.address = text_of(row[3], "address");
      }
    } else if (row.is_object()) {
      e.start_time = required_datetime(required_text(row, {"start time", "start_time", "start", "starttime"}, "start time"),
                                       "start time");
      e.end_time =
          required_datetime(required_text(row, {"end time", "end_time", "end", "endtime"}, "end time"), "end time");
      std::string event = required_text(row, {"event", "activity", "location"}, "event");
      if (const Json* address = find_any(row, {"address"})) {
        e.event_label = event;
        e.address = text_of(*address, "address");
      } else {
        std::tie(e.event_label, e.address) = split_event_location(event);
      }
    } else {
      parse_error("schedule row is neither a list nor an object");
    }
    events.push_back(std::move(e));
  }
  std::stable_sort(events.begin(), events.end(),
                   [](const auto& a, const auto& b) { return a.start_time < b.start_time; });
  return events;
}

std::vector<BrowsingEntry> parse_browsing_response(std::string_view text) {
  Json root = parse_lenient_json(text);
  const Json& list = list_of(root, {"browser_history", "browsing_history", "history", "entries"});
  std::vector<BrowsingEntry> entries;
  for (const auto& row : list) {
    BrowsingEntry e;
    if (row.is_array()) {
      if (row.size() != 3) parse_error("browsing row must be [datetime, title, url]");
      e.visited_at = required_datetime(text_of(row[0], "datetime"), "datetime");
      e.title = text_of(row[1], "title");
      e.url = text_of(row[2], "url");
    } else if (row.is_object()) {
      e.visited_at =
          required_datetime(required_text(row, {"datetime", "time", "visited_at", "date"}, "datetime"), "datetime");
      e.title = required_text(row, {"title", "webpage title"}, "title");
      e.url = required_text(row, {"url", "webpage url"}, "url");
    } else {
      parse_error("browsing row is neither a list nor an object");
    }
    entries.push_back(std::move(e));
  }
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) { return a.visited_at < b.visited_at; });
  return entries;
}

std::vector<PostDraft> parse_posts_response(std::string_view text) {
  Json root = parse_lenient_json(text);
  const Json& list = list_of(root, {"posts"});
  std::vector<PostDraft> posts;
  for (const auto& row : list) {
    PostDraft p;
    if (row.is_array()) {
      if (row.size() != 3) parse_error("post row must be [time, content, address]");
      p.posted_at = required_datetime(text_of(row[0], "time"), "post time");
      p.content = text_of(row[1], "content");
      p.address = text_of(row[2], "address");
    } else if (row.is_object()) {
      p.posted_at = required_datetime(required_text(row, {"time", "datetime", "posted_at"}, "time"), "post time");
      p.address = required_text(row, {"address", "location"}, "address");
      p.content = required_text(row, {"content", "text", "post"}, "content");
      auto lat = number_of(find_any(row, {"latitude", "lat"}));
      auto lon = number_of(find_any(row, {"longitude", "lon", "lng"}));
      if (lat && lon) p.location = GeoPoint{*lat, *lon};
      if (const Json* tz = find_any(row, {"timezone", "time zone"})) p.timezone = text_of(*tz, "timezone");
      if (const Json* locale = find_any(row, {"locale"})) p.locale = text_of(*locale, "locale");
    } else {
      parse_error("post row is neither a list nor an object");
    }
    if (p.content.empty()) parse_error("post content is empty");
    posts.push_back(std::move(p));
  }
  std::stable_sort(posts.begin(), posts.end(), [](const auto& a, const auto& b) { return a.posted_at < b.posted_at; });
  return posts;
}

DeviceEnvironment parse_device_response(std::string_view text) {
  DeviceEnvironment device;
  std::string explicit_ua;

  if (text.find('{') != std::string_view::npos) {
    try {
      Json root = parse_lenient_json(text);
      if (root.is_object()) {
        if (const Json* d = find_any(root, {"device", "device_name", "device name"})) device.device_name = text_of(*d, "device");
        if (const Json* b = find_any(root, {"browser", "browser_name", "browser name"})) device.browser_name = text_of(*b, "browser");
        if (const Json* u = find_any(root, {"user_agent", "user agent", "useragent", "user-agent"})) explicit_ua = text_of(*u, "user agent");
      }
    } catch (const Error&) {
      // fall through to the prose readers
    }
  }

  for (const auto& raw : lines_of(text)) {
    std::string line(trim(raw));
    if (explicit_ua.empty()) {
      if (auto pos = line.find("Mozilla/"); pos != std::string::npos) {
        explicit_ua = strip_decoration(line.substr(pos));
        continue;
      }
    }
    auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    std::string key = to_lower(strip_decoration(line.substr(0, colon)));
    std::string value = strip_decoration(line.substr(colon + 1));
    if (value.empty()) continue;
    if (device.browser_name.empty() && key.find("browser") != std::string::npos) device.browser_name = value;
    if (device.device_name.empty() && key.find("device") != std::string::npos) device.device_name = strip_article(value);
  }

  if (device.browser_name.empty() || device.device_name.empty()) {
    for (const auto& raw : lines_of(text)) {
      std::string line = strip_decoration(raw);
      auto on = line.find(" on ");
      if (on == std::string::npos || line.find("Mozilla/") != std::string::npos) continue;
      std::string browser = strip_decoration(line.substr(0, on));
      std::string rest = line.substr(on + 4);
      if (auto stop = rest.find_first_of(".;\n"); stop != std::string::npos) rest = rest.substr(0, stop);
      if (device.browser_name.empty()) device.browser_name = browser;
      if (device.device_name.empty()) device.device_name = strip_article(strip_decoration(rest));
      break;
    }
  }

  if (device.browser_name.empty()) parse_error("no browser in device response");
  if (device.device_name.empty()) parse_error("no device in device response");
  if (!explicit_ua.empty()) {
    device.user_agent = explicit_ua;
  } else if (auto ua = compose_user_agent(device.browser_name, device.device_name)) {
    device.user_agent = *ua;
  } else {
    parse_error("no user agent template for browser \"" + device.browser_name + "\"");
  }
  if (!user_agent_mentions(device.user_agent, device.browser_name)) {
    parse_error("user agent does not mention browser \"" + device.browser_name + "\"");
  }
  return device;
}

}  // namespace sandbox
