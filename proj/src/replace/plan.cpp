#include "sandbox/replace/plan.hpp"

#include "sandbox/core/persona_json.hpp"
#include "sandbox/core/timezone.hpp"
#include "sandbox/replace/ad_profile.hpp"
#include "sandbox/validate/validator.hpp"

namespace sandbox {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

Json step_to_json(const PlanStep& step) {
  return std::visit(
      Overloaded{
          [](const SetAdProfileField& s) {
            return Json{{"op", "SetAdProfileField"}, {"field", s.field}, {"value", s.value}};
          },
          [](const OverrideGeolocation& s) {
            return Json{{"op", "OverrideGeolocation"},
                        {"latitude", s.location.latitude},
                        {"longitude", s.location.longitude},
                        {"accuracy", s.accuracy_m}};
          },
          [](const OverrideUserAgent& s) { return Json{{"op", "OverrideUserAgent"}, {"user_agent", s.user_agent}}; },
          [](const WriteHistoryDb& s) {
            return Json{{"op", "WriteHistoryDb"},
                        {"path", s.path},
                        {"zone", s.zone},
                        {"entries", browsing_to_json(s.entries)}};
          },
          [](const ConnectVpn& s) { return Json{{"op", "ConnectVpn"}, {"server_id", s.server_id}}; },
      },
      step);
}

PlanStep step_from_json(const Json& j) {
  auto op = j.at("op").get<std::string>();
  if (op == "SetAdProfileField") return SetAdProfileField{j.at("field").get<std::string>(), j.at("value").get<std::string>()};
  if (op == "OverrideGeolocation") {
    return OverrideGeolocation{{j.at("latitude").get<double>(), j.at("longitude").get<double>()},
                               j.at("accuracy").get<double>()};
  }
  if (op == "OverrideUserAgent") return OverrideUserAgent{j.at("user_agent").get<std::string>()};
  if (op == "WriteHistoryDb") {
    return WriteHistoryDb{j.at("path").get<std::string>(), j.at("zone").get<std::string>(),
                          browsing_from_json(j.at("entries"))};
  }
  if (op == "ConnectVpn") return ConnectVpn{j.at("server_id").get<std::string>()};
  throw Error(ErrorCode::ParseFailed, "unknown plan step \"" + op + "\"");
}

}  // namespace

std::string_view step_name(const PlanStep& step) {
  static constexpr std::string_view kNames[] = {"SetAdProfileField", "OverrideGeolocation", "OverrideUserAgent",
                                                "WriteHistoryDb", "ConnectVpn"};
  return kNames[step.index()];
}

Json plan_to_json(const ActivationPlan& plan) {
  Json steps = Json::array();
  for (const auto& s : plan.steps) steps.push_back(step_to_json(s));
  return Json{{"persona_id", plan.persona_id}, {"created_at", plan.created_at}, {"steps", std::move(steps)}};
}

ActivationPlan plan_from_json(const Json& json) {
  try {
    ActivationPlan plan;
    plan.persona_id = json.at("persona_id").get<std::string>();
    plan.created_at = json.at("created_at").get<std::string>();
    for (const auto& s : json.at("steps")) plan.steps.push_back(step_from_json(s));
    return plan;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseFailed, std::string("activation plan: ") + e.what());
  }
}

std::optional<ScheduleEvent> active_event_at(std::span<const ScheduleEvent> schedule, LocalDateTime t) {
  auto find = [&](LocalDateTime when) -> std::optional<ScheduleEvent> {
    for (const auto& e : schedule) {
      if (e.start_time <= when && when < e.end_time) return e;
    }
    // The last second of a day is inside the day's final event.
    for (const auto& e : schedule) {
      if (when == e.end_time && time_of_day(when) == kDayLastSecond) return e;
    }
    return std::nullopt;
  };
  if (auto hit = find(t)) return hit;

  std::chrono::weekday wanted{std::chrono::local_days{date_of(t)}};
  std::optional<Date> first_match;
  for (const auto& e : schedule) {
    Date d = date_of(e.start_time);
    if (std::chrono::weekday{std::chrono::local_days{d}} != wanted) continue;
    if (!first_match || std::chrono::local_days{d} < std::chrono::local_days{*first_match}) first_match = d;
  }
  if (!first_match) return std::nullopt;
  return find(at(*first_match, time_of_day(t)));
}

ActivationPlan build_activation_plan(const PersonaProfile& persona, std::span<const VpnServer> servers,
                                     Geocoder& geocoder, const PlanOptions& options) {
  require(persona.attributes.has_value(), "activation needs privacy attributes");
  const auto& attrs = *persona.attributes;

  std::optional<std::string> zone;
  if (!persona.browsing.empty()) {
    auto violations = validate_browsing(persona.browsing, persona.schedule, std::nullopt);
    if (has_hard_violation(violations)) {
      throw Error(ErrorCode::ValidationFailed, "browsing history has hard violations, first: " +
                                                   violations.front().subject + " " + violations.front().message);
    }
    zone = zone_for_state(attrs.state);
    if (!zone) throw Error(ErrorCode::ValidationFailed, "no supported time zone for state \"" + attrs.state + "\"");
  }

  std::string anchor = attrs.home_address();
  if (auto event = active_event_at(persona.schedule, options.plan_time); event && !event->address.empty()) {
    anchor = event->address;
  }
  GeoPoint location = geocoder.geocode(anchor);
  const VpnServer& server = select_vpn_server(location, servers);

  ActivationPlan plan;
  plan.persona_id = persona.id;
  plan.created_at = options.created_at;
  auto mapping = map_ad_center_profile(attrs);
  auto values = ad_profile_values(mapping.profile);
  for (std::size_t i = 0; i < kAdProfileFields.size(); ++i) {
    plan.steps.emplace_back(SetAdProfileField{std::string(kAdProfileFields[i].name), values[i]});
  }
  plan.steps.emplace_back(OverrideGeolocation{location});
  if (persona.device) plan.steps.emplace_back(OverrideUserAgent{persona.device->user_agent});
  if (!persona.browsing.empty()) {
    plan.steps.emplace_back(WriteHistoryDb{(options.profile_dir / "History").string(), *zone, persona.browsing});
  }
  plan.steps.emplace_back(ConnectVpn{server.id});
  return plan;
}

}  // namespace sandbox
