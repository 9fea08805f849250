#pragma once

#include <string>
#include <vector>

#include "sandbox/replace/driver.hpp"
#include "sandbox/replace/plan.hpp"

namespace sandbox {

inline constexpr std::string_view kAdSettingsUrl = "https://myadcenter.google.com/controls";

enum class StepStatus { Ok, Failed, Skipped };

std::string_view to_string(StepStatus status);

struct StepLog {
  std::size_t index = 0;
  std::string step;    // step_name()
  std::string target;  // field name, server id, path, ...
  StepStatus status = StepStatus::Ok;
  std::string detail;

  bool operator==(const StepLog&) const = default;
};

struct ExecutionLog {
  std::string persona_id;
  std::vector<StepLog> steps;
  bool aborted = false;  // the driver dropped mid-run

  bool all_ok() const;
  bool operator==(const ExecutionLog&) const = default;
};

Json execution_log_to_json(const ExecutionLog& log);
ExecutionLog execution_log_from_json(const Json& json);

/// Dispatches the plan's steps in order. Ad-profile fields need the
/// settings page; when it cannot be opened they are skipped. Other steps
/// are independent: a failure is logged and execution continues. A driver
/// that disconnects mid-run marks the rest skipped and sets `aborted`.
/// Throws DriverDisconnected when the driver is not connected at the start.
ExecutionLog execute_plan(const ActivationPlan& plan, BrowserDriver& driver, VpnClient& vpn);

}  // namespace sandbox
