#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "sandbox/core/types.hpp"
#include "sandbox/metrics/overlap.hpp"
#include "sandbox/pipeline/pipeline.hpp"
#include "sandbox/replace/executor.hpp"
#include "sandbox/replace/plan.hpp"

struct sqlite3;

namespace sandbox {

enum class PersonaStatus { Draft, Complete, Active };

std::string_view to_string(PersonaStatus status);
std::optional<PersonaStatus> parse_persona_status(std::string_view name);

enum class JobState { Idle, Queued, Running, Succeeded, Failed };

std::string_view to_string(JobState state);
std::optional<JobState> parse_job_state(std::string_view name);

struct JobInfo {
  JobState state = JobState::Idle;
  std::optional<Stage> failed_stage;
  std::string error_code;
  std::string message;

  bool operator==(const JobInfo&) const = default;
};

struct PersonaRecord {
  PersonaProfile profile;
  PersonaStatus status = PersonaStatus::Draft;
  std::set<Stage> stale;
  JobInfo job;
  std::vector<StageReport> reports;  // latest report per stage, pipeline order
  std::string created_at;
  std::string updated_at;

  bool operator==(const PersonaRecord&) const = default;
};

Json record_to_json(const PersonaRecord& record);
PersonaRecord record_from_json(const Json& json);

/// Record export: the JSON document with two-space indent and a trailing newline.
std::string export_record(const PersonaRecord& record);

struct StoredActivation {
  std::int64_t id = 0;
  ActivationPlan plan;
  ExecutionLog log;
};

/// SQLite-backed store with one table per data kind. All methods are
/// thread-safe; writes run in transactions. ":memory:" opens a private
/// in-memory database.
class PersonaStore {
 public:
  explicit PersonaStore(const std::filesystem::path& path);
  ~PersonaStore();
  PersonaStore(const PersonaStore&) = delete;
  PersonaStore& operator=(const PersonaStore&) = delete;

  /// Inserts or replaces the record and all of its child rows. Throws
  /// AlreadyActive when it would make a second record active.
  void put(const PersonaRecord& record);
  std::optional<PersonaRecord> get(const std::string& id) const;
  bool exists(const std::string& id) const;
  /// Ordered by creation time, then id.
  std::vector<PersonaRecord> list() const;
  std::optional<std::string> active_id() const;

  void add_observations(const std::vector<AdObservation>& batch);
  std::vector<AdObservation> observations() const;

  std::int64_t add_activation(const ActivationPlan& plan, const ExecutionLog& log);
  std::optional<StoredActivation> latest_activation(const std::string& persona_id) const;

 private:
  PersonaRecord load(const std::string& id) const;

  sqlite3* db_ = nullptr;
  mutable std::recursive_mutex mutex_;
};

}  // namespace sandbox
