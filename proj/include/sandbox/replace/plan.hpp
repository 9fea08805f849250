#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sandbox/core/attributes.hpp"
#include "sandbox/core/types.hpp"
#include "sandbox/providers/geocoder.hpp"
#include "sandbox/replace/vpn.hpp"

namespace sandbox {

struct SetAdProfileField {
  std::string field;
  std::string value;
  bool operator==(const SetAdProfileField&) const = default;
};

struct OverrideGeolocation {
  GeoPoint location;
  double accuracy_m = 100.0;
  bool operator==(const OverrideGeolocation&) const = default;
};

struct OverrideUserAgent {
  std::string user_agent;
  bool operator==(const OverrideUserAgent&) const = default;
};

/// The entries travel with the step so the plan stays self-contained.
struct WriteHistoryDb {
  std::string path;
  std::string zone;
  std::vector<BrowsingEntry> entries;
  bool operator==(const WriteHistoryDb&) const = default;
};

struct ConnectVpn {
  std::string server_id;
  bool operator==(const ConnectVpn&) const = default;
};

using PlanStep = std::variant<SetAdProfileField, OverrideGeolocation, OverrideUserAgent, WriteHistoryDb, ConnectVpn>;

std::string_view step_name(const PlanStep& step);

struct ActivationPlan {
  std::string persona_id;
  std::vector<PlanStep> steps;
  std::string created_at;

  bool operator==(const ActivationPlan&) const = default;
};

Json plan_to_json(const ActivationPlan& plan);
ActivationPlan plan_from_json(const Json& json);

struct PlanOptions {
  /// Persona-local wall-clock time the plan is built for. Picks the
  /// schedule event whose location anchors geolocation.
  LocalDateTime plan_time;
  std::filesystem::path profile_dir;  // history file goes to <profile_dir>/History
  std::string created_at;
};

/// The schedule event active at `t`. A time outside the schedule's dates is
/// projected onto the first scheduled day with the same weekday.
std::optional<ScheduleEvent> active_event_at(std::span<const ScheduleEvent> schedule, LocalDateTime t);

/// Pure: geocodes the anchor address and composes the steps in their fixed
/// order. Throws PreconditionFailed without attributes, ValidationFailed on
/// hard browsing violations, and propagates geocoder NotFound.
ActivationPlan build_activation_plan(const PersonaProfile& persona, std::span<const VpnServer> servers,
                                     Geocoder& geocoder, const PlanOptions& options);

}  // namespace sandbox
