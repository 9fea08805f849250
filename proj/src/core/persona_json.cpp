#include "sandbox/core/persona_json.hpp"

#include "sandbox/core/error.hpp"

namespace sandbox {
namespace {

LocalDateTime datetime_field(const Json& value, std::string_view what) {
  if (!value.is_string()) throw Error(ErrorCode::ParseFailed, std::string(what) + " is not a string");
  auto t = parse_datetime(value.get<std::string>());
  if (!t) {
    throw Error(ErrorCode::ParseFailed,
                std::string(what) + " \"" + value.get<std::string>() + "\" is not YYYY-MM-DD HH:MM:SS");
  }
  return *t;
}

Date date_field(const Json& json, const char* key) {
  auto d = parse_date(json.at(key).get<std::string>());
  if (!d) throw Error(ErrorCode::PreconditionFailed, std::string(key) + " is not YYYY-MM-DD");
  return *d;
}

template <typename F>
auto guarded(F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailed, e.what());
  }
}

}  // namespace

Json guidance_to_json(const GenerationGuidance& g) {
  Json j = Json::object();
  j["text"] = g.text;
  j["start_date"] = format_date(g.date_range.start);
  j["end_date"] = format_date(g.date_range.end);
  j["browsing_entries_per_day"] = g.browsing_entries_per_day;
  j["posts_total"] = g.posts_total;
  return j;
}

GenerationGuidance guidance_from_json(const Json& json) {
  try {
    GenerationGuidance g;
    if (!json.is_object()) throw Error(ErrorCode::PreconditionFailed, "guidance must be an object");
    g.text = json.value("text", std::string{});
    g.date_range.start = date_field(json, "start_date");
    g.date_range.end = date_field(json, "end_date");
    g.browsing_entries_per_day = json.value("browsing_entries_per_day", g.browsing_entries_per_day);
    g.posts_total = json.value("posts_total", g.posts_total);
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::PreconditionFailed, std::string("malformed guidance: ") + e.what());
  }
}

Json device_to_json(const DeviceEnvironment& d) {
  return Json{{"device_name", d.device_name},
              {"browser_name", d.browser_name},
              {"user_agent", d.user_agent}};
}

DeviceEnvironment device_from_json(const Json& json) {
  return guarded([&] {
    return DeviceEnvironment{json.at("device_name").get<std::string>(),
                             json.at("browser_name").get<std::string>(),
                             json.at("user_agent").get<std::string>()};
  });
}

Json schedule_to_json(const std::vector<ScheduleEvent>& events) {
  Json arr = Json::array();
  for (const auto& e : events) {
    arr.push_back(Json::array({format_datetime(e.start_time), format_datetime(e.end_time),
                               e.event_label, e.address}));
  }
  return arr;
}

std::vector<ScheduleEvent> schedule_from_json(const Json& json) {
  return guarded([&] {
    std::vector<ScheduleEvent> events;
    for (const auto& row : json) {
      if (!row.is_array() || row.size() != 4) {
        throw Error(ErrorCode::ParseFailed, "schedule row must be [start, end, label, address]");
      }
      events.push_back({datetime_field(row[0], "schedule start"), datetime_field(row[1], "schedule end"),
                        row[2].get<std::string>(), row[3].get<std::string>()});
    }
    return events;
  });
}

Json browsing_to_json(const std::vector<BrowsingEntry>& entries) {
  Json arr = Json::array();
  for (const auto& e : entries) {
    arr.push_back(Json::array({format_datetime(e.visited_at), e.title, e.url}));
  }
  return arr;
}

std::vector<BrowsingEntry> browsing_from_json(const Json& json) {
  return guarded([&] {
    std::vector<BrowsingEntry> entries;
    for (const auto& row : json) {
      if (!row.is_array() || row.size() != 3) {
        throw Error(ErrorCode::ParseFailed, "browsing row must be [datetime, title, url]");
      }
      entries.push_back(
          {datetime_field(row[0], "browsing datetime"), row[1].get<std::string>(), row[2].get<std::string>()});
    }
    return entries;
  });
}

Json post_to_json(const SocialPost& p) {
  Json j = Json::object();
  j["time"] = format_datetime(p.posted_at);
  j["address"] = p.address;
  j["content"] = p.content;
  j["images"] = p.images;
  j["latitude"] = p.latitude;
  j["longitude"] = p.longitude;
  j["timezone"] = p.timezone;
  j["locale"] = p.locale;
  return j;
}

SocialPost post_from_json(const Json& json) {
  return guarded([&] {
    SocialPost p;
    p.posted_at = datetime_field(json.at("time"), "post time");
    p.address = json.at("address").get<std::string>();
    p.content = json.at("content").get<std::string>();
    p.images = json.value("images", std::vector<std::string>{});
    p.latitude = json.value("latitude", 0.0);
    p.longitude = json.value("longitude", 0.0);
    p.timezone = json.value("timezone", std::string{});
    p.locale = json.value("locale", std::string{});
    return p;
  });
}

Json persona_to_json(const PersonaProfile& persona) {
  Json j = Json::object();
  j["id"] = persona.id;
  j["description"] = persona.description;
  j["attributes"] = persona.attributes ? attributes_to_json(*persona.attributes) : Json(nullptr);
  j["portrait_prompt"] = persona.portrait_prompt;
  j["device"] = persona.device ? device_to_json(*persona.device) : Json(nullptr);
  j["schedule"] = schedule_to_json(persona.schedule);
  j["browsing"] = browsing_to_json(persona.browsing);
  Json posts = Json::array();
  for (const auto& p : persona.posts) posts.push_back(post_to_json(p));
  j["posts"] = std::move(posts);
  j["guidance"] = guidance_to_json(persona.guidance);
  j["provenance"] = Json{{"generator_id", persona.provenance.generator_id},
                         {"prompt_template_version", persona.provenance.prompt_template_version},
                         {"created_at", persona.provenance.created_at}};
  return j;
}

PersonaProfile persona_from_json(const Json& json) {
  return guarded([&] {
    PersonaProfile p;
    p.id = json.at("id").get<std::string>();
    p.description = json.at("description").get<std::string>();
    if (const auto& a = json.at("attributes"); !a.is_null()) {
      p.attributes = attributes_from_json(a).attributes;
    }
    p.portrait_prompt = json.value("portrait_prompt", std::string{});
    if (const auto& d = json.at("device"); !d.is_null()) p.device = device_from_json(d);
    p.schedule = schedule_from_json(json.at("schedule"));
    p.browsing = browsing_from_json(json.at("browsing"));
    for (const auto& post : json.at("posts")) p.posts.push_back(post_from_json(post));
    if (json.contains("guidance")) p.guidance = guidance_from_json(json.at("guidance"));
    if (json.contains("provenance")) {
      const auto& prov = json.at("provenance");
      p.provenance = {prov.value("generator_id", std::string{}),
                      prov.value("prompt_template_version", std::string{}),
                      prov.value("created_at", std::string{})};
    }
    return p;
  });
}

std::string export_persona(const PersonaProfile& persona) {
  return persona_to_json(persona).dump(2) + "\n";
}

PersonaProfile import_persona(std::string_view text) {
  Json json;
  try {
    json = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseFailed, std::string("persona document: ") + e.what());
  }
  return persona_from_json(json);
}

}  // namespace sandbox
