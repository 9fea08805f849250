#include "sandbox/replace/executor.hpp"

#include <algorithm>

#include "sandbox/replace/ad_profile.hpp"
#include "sandbox/replace/history_db.hpp"

namespace sandbox {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string target_of(const PlanStep& step) {
  return std::visit(Overloaded{
                        [](const SetAdProfileField& s) { return s.field; },
                        [](const OverrideGeolocation& s) {
                          return Json(s.location.latitude).dump() + "," + Json(s.location.longitude).dump();
                        },
                        [](const OverrideUserAgent& s) { return s.user_agent; },
                        [](const WriteHistoryDb& s) { return s.path; },
                        [](const ConnectVpn& s) { return s.server_id; },
                    },
                    step);
}

std::optional<StepStatus> parse_status(std::string_view s) {
  if (s == "ok") return StepStatus::Ok;
  if (s == "failed") return StepStatus::Failed;
  if (s == "skipped") return StepStatus::Skipped;
  return std::nullopt;
}

}  // namespace

std::string_view to_string(StepStatus status) {
  switch (status) {
    case StepStatus::Ok: return "ok";
    case StepStatus::Failed: return "failed";
    case StepStatus::Skipped: return "skipped";
  }
  return "unknown";
}

bool ExecutionLog::all_ok() const {
  return !aborted && std::all_of(steps.begin(), steps.end(), [](const StepLog& s) { return s.status == StepStatus::Ok; });
}

Json execution_log_to_json(const ExecutionLog& log) {
  Json steps = Json::array();
  for (const auto& s : log.steps) {
    steps.push_back(Json{{"index", s.index},
                         {"step", s.step},
                         {"target", s.target},
                         {"status", std::string(to_string(s.status))},
                         {"detail", s.detail}});
  }
  return Json{{"persona_id", log.persona_id}, {"aborted", log.aborted}, {"steps", std::move(steps)}};
}

ExecutionLog execution_log_from_json(const Json& json) {
  try {
    ExecutionLog log;
    log.persona_id = json.at("persona_id").get<std::string>();
    log.aborted = json.at("aborted").get<bool>();
    for (const auto& s : json.at("steps")) {
      auto status = parse_status(s.at("status").get<std::string>());
      if (!status) throw Error(ErrorCode::ParseFailed, "execution log: bad status");
      log.steps.push_back({s.at("index").get<std::size_t>(), s.at("step").get<std::string>(),
                           s.at("target").get<std::string>(), *status, s.at("detail").get<std::string>()});
    }
    return log;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseFailed, std::string("execution log: ") + e.what());
  }
}

ExecutionLog execute_plan(const ActivationPlan& plan, BrowserDriver& driver, VpnClient& vpn) {
  if (!driver.connected()) throw Error(ErrorCode::DriverDisconnected, "browser driver is not connected");

  ExecutionLog log;
  log.persona_id = plan.persona_id;
  std::optional<CommandResult> settings_page;  // opened lazily before the first ad field

  auto run_step = [&](const PlanStep& step) -> CommandResult {
    return std::visit(
        Overloaded{
            [&](const SetAdProfileField& s) -> CommandResult {
              if (!settings_page) settings_page = driver.navigate(std::string(kAdSettingsUrl));
              if (!settings_page->ok) return {false, "skipped: ad settings page unavailable"};
              std::string label(ad_field_label(s.field));
              if (label.empty()) return {false, "unknown ad profile field \"" + s.field + "\""};
              auto found = driver.find_field(label);
              if (!found.ok) return found;
              return driver.set_field(label, s.value);
            },
            [&](const OverrideGeolocation& s) {
              return driver.set_geolocation_override(s.location.latitude, s.location.longitude, s.accuracy_m);
            },
            [&](const OverrideUserAgent& s) { return driver.set_user_agent_override(s.user_agent); },
            [&](const WriteHistoryDb& s) -> CommandResult {
              try {
                auto n = write_history_db(s.entries, s.zone, s.path);
                return {true, std::to_string(n) + " visits written"};
              } catch (const Error& e) {
                return {false, e.what()};
              }
            },
            [&](const ConnectVpn& s) { return vpn.connect(s.server_id); },
        },
        step);
  };

  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const auto& step = plan.steps[i];
    StepLog entry{i, std::string(step_name(step)), target_of(step), StepStatus::Ok, {}};
    if (log.aborted) {
      entry.status = StepStatus::Skipped;
      entry.detail = "driver disconnected";
    } else {
      try {
        auto r = run_step(step);
        entry.detail = r.detail;
        if (!r.ok) {
          bool skipped = r.detail.rfind("skipped: ", 0) == 0;
          entry.status = skipped ? StepStatus::Skipped : StepStatus::Failed;
          if (skipped) entry.detail = r.detail.substr(9);
        }
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DriverDisconnected) throw;
        entry.status = StepStatus::Failed;
        entry.detail = e.what();
        log.aborted = true;
      }
    }
    log.steps.push_back(std::move(entry));
  }
  return log;
}

}  // namespace sandbox
