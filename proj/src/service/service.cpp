#include "sandbox/service/service.hpp"

#include <spdlog/spdlog.h>

#include "sandbox/core/timezone.hpp"

namespace sandbox {

JobQueue::JobQueue(std::size_t workers) {
  if (workers == 0) workers = 1;
  for (std::size_t i = 0; i < workers; ++i) threads_.emplace_back([this] { run(); });
}

JobQueue::~JobQueue() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  work_cv_.notify_all();
  for (auto& t : threads_) t.join();
}

void JobQueue::submit(std::function<void()> job) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(job));
  }
  work_cv_.notify_one();
}

void JobQueue::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && running_ == 0; });
}

void JobQueue::run() {
  for (;;) {
    std::function<void()> job;
    {
      std::unique_lock lock(mutex_);
      work_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (queue_.empty()) return;
      job = std::move(queue_.front());
      queue_.pop_front();
      ++running_;
    }
    try {
      job();
    } catch (const std::exception& e) {
      spdlog::error("background job failed: {}", e.what());
    }
    {
      std::lock_guard lock(mutex_);
      --running_;
    }
    idle_cv_.notify_all();
  }
}

namespace {

bool job_busy(const PersonaRecord& r) { return r.job.state == JobState::Queued || r.job.state == JobState::Running; }

bool all_stages_present(const PersonaProfile& p) {
  return std::all_of(kAllStages.begin(), kAllStages.end(), [&](Stage s) { return p.has_stage(s); });
}

void put_report(std::vector<StageReport>& reports, StageReport report) {
  auto rank = [](Stage s) { return static_cast<int>(s); };
  std::erase_if(reports, [&](const StageReport& r) { return r.stage == report.stage; });
  auto pos = std::find_if(reports.begin(), reports.end(),
                          [&](const StageReport& r) { return rank(r.stage) > rank(report.stage); });
  reports.insert(pos, std::move(report));
}

}  // namespace

PersonaService::PersonaService(PersonaStore& store, ServiceDeps deps)
    : store_(store), deps_(std::move(deps)), jobs_(deps_.workers) {
  require(deps_.provider != nullptr, "service needs a text provider");
  require(deps_.geocoder != nullptr, "service needs a geocoder");
  require(deps_.vpn != nullptr, "service needs a VPN client");
  require(static_cast<bool>(deps_.driver_factory), "service needs a driver factory");
  if (!deps_.clock) deps_.clock = [] { return std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now()); };
}

PersonaService::~PersonaService() { jobs_.wait_idle(); }

std::string PersonaService::now_text() const {
  auto t = deps_.clock();
  auto text = format_datetime(LocalDateTime{t.time_since_epoch()});
  text[10] = 'T';
  return text + "Z";
}

std::filesystem::path PersonaService::profile_dir(const std::string& id) const { return deps_.sandbox_root / id; }

std::shared_ptr<std::mutex> PersonaService::record_mutex(const std::string& id) {
  std::lock_guard lock(ids_mutex_);
  auto& m = record_mutexes_[id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

GenerationPipeline PersonaService::make_pipeline() {
  return GenerationPipeline(*deps_.provider, *deps_.geocoder, deps_.templates, deps_.pipeline);
}

std::string PersonaService::create_persona(const GenerationGuidance& guidance) {
  check_guidance(guidance);
  PersonaRecord record;
  record.created_at = now_text();
  record.updated_at = record.created_at;
  {
    std::lock_guard lock(ids_mutex_);
    do {
      record.profile.id = derive_persona_id(guidance, record.created_at + "#" + std::to_string(++sequence_));
    } while (store_.exists(record.profile.id));
  }
  record.profile.guidance = guidance;
  record.job.state = JobState::Queued;
  store_.put(record);
  std::string id = record.profile.id;
  jobs_.submit([this, id] { run_generation(id); });
  return id;
}

void PersonaService::run_generation(const std::string& id) {
  auto mutex = record_mutex(id);
  PersonaRecord record;
  {
    std::lock_guard lock(*mutex);
    record = get(id);
    record.job = {JobState::Running, std::nullopt, {}, {}};
    record.updated_at = now_text();
    store_.put(record);
  }

  PipelineOutcome outcome;
  std::optional<JobInfo> crash;
  try {
    auto pipeline = make_pipeline();
    outcome = pipeline.run_full_pipeline(record.profile.guidance, {id, record.created_at});
  } catch (const Error& e) {
    crash = JobInfo{JobState::Failed, std::nullopt, std::string(to_string(e.code())), e.what()};
  } catch (const std::exception& e) {
    crash = JobInfo{JobState::Failed, std::nullopt, "Internal", e.what()};
  }

  std::lock_guard lock(*mutex);
  if (crash) {
    record.job = *crash;
  } else {
    record.profile = std::move(outcome.persona);
    record.reports = std::move(outcome.reports);
    record.stale.clear();
    if (outcome.failure) {
      record.job = {JobState::Failed, outcome.failure->stage, std::string(to_string(outcome.failure->code)),
                    outcome.failure->message};
      spdlog::warn("persona {}: generation failed at {}: {}", id, to_string(outcome.failure->stage),
                   outcome.failure->message);
    } else {
      record.job = {JobState::Succeeded, std::nullopt, {}, {}};
    }
  }
  record.status = all_stages_present(record.profile) ? PersonaStatus::Complete : PersonaStatus::Draft;
  record.updated_at = now_text();
  store_.put(record);
}

PersonaRecord PersonaService::get(const std::string& id) const {
  auto record = store_.get(id);
  if (!record) throw Error(ErrorCode::NotFound, "no persona " + id);
  return std::move(*record);
}

PersonaRecord PersonaService::update_attributes(const std::string& id, const Json& patch) {
  auto mutex = record_mutex(id);
  std::lock_guard lock(*mutex);
  auto record = get(id);
  if (record.status == PersonaStatus::Active) throw Error(ErrorCode::ActiveLocked, "persona " + id + " is active");
  if (job_busy(record)) throw Error(ErrorCode::PreconditionFailed, "generation still running for " + id);
  if (!record.profile.attributes) throw Error(ErrorCode::StageOrderViolated, "persona " + id + " has no attributes yet");

  auto patched = apply_attribute_patch(*record.profile.attributes, patch);
  auto problems = attribute_problems(patched);
  if (!problems.empty()) {
    throw Error(ErrorCode::InvariantViolated, problems.front() == AttributeProblem::AgeOutOfRange
                                                  ? "age must be within 18..70"
                                                  : "birthday does not match age");
  }
  record.profile.attributes = patched;
  for (Stage s : {Stage::Schedule, Stage::Browsing, Stage::Posts}) {
    if (record.profile.has_stage(s)) record.stale.insert(s);
  }
  record.updated_at = now_text();
  store_.put(record);
  return record;
}

PersonaRecord PersonaService::regenerate_stage(const std::string& id, Stage stage) {
  auto mutex = record_mutex(id);
  std::lock_guard lock(*mutex);
  auto record = get(id);
  if (record.status == PersonaStatus::Active) throw Error(ErrorCode::ActiveLocked, "persona " + id + " is active");
  if (job_busy(record)) throw Error(ErrorCode::PreconditionFailed, "generation still running for " + id);

  auto pipeline = make_pipeline();
  auto report = pipeline.run_stage(record.profile, stage);
  put_report(record.reports, std::move(report));
  record.stale.erase(stage);
  for (Stage later : kAllStages) {
    if (static_cast<int>(later) > static_cast<int>(stage) && record.profile.has_stage(later)) record.stale.insert(later);
  }
  record.status = all_stages_present(record.profile) ? PersonaStatus::Complete : PersonaStatus::Draft;
  record.updated_at = now_text();
  store_.put(record);
  return record;
}

ActivationResult PersonaService::activate(const std::string& id, const std::string& driver_endpoint) {
  std::unique_lock guard(activation_mutex_, std::try_to_lock);
  if (!guard.owns_lock()) throw Error(ErrorCode::AlreadyActive, "another activation is in progress");

  auto mutex = record_mutex(id);
  std::lock_guard lock(*mutex);
  auto record = get(id);
  if (auto active = store_.active_id()) throw Error(ErrorCode::AlreadyActive, "persona " + *active + " is active");
  if (record.status != PersonaStatus::Complete) {
    throw Error(ErrorCode::PreconditionFailed, "persona " + id + " is not complete");
  }
  if (!record.stale.empty()) {
    throw Error(ErrorCode::PreconditionFailed, "persona " + id + " has stale stages; regenerate them first");
  }

  auto now = deps_.clock();
  LocalDateTime plan_time{now.time_since_epoch()};
  if (auto zone = zone_for_state(record.profile.attributes->state)) plan_time = to_local(now, *zone);
  auto dir = profile_dir(id);
  std::filesystem::remove_all(dir);

  ActivationResult result;
  result.plan = build_activation_plan(record.profile, deps_.vpn_servers, *deps_.geocoder,
                                      PlanOptions{plan_time, dir, now_text()});
  auto driver = deps_.driver_factory(driver_endpoint.empty() ? deps_.default_driver : driver_endpoint);
  result.log = execute_plan(result.plan, *driver, *deps_.vpn);
  store_.add_activation(result.plan, result.log);
  if (result.log.aborted) {
    throw Error(ErrorCode::DriverDisconnected, "browser driver disconnected during activation of " + id);
  }
  record.status = PersonaStatus::Active;
  record.updated_at = now_text();
  store_.put(record);
  spdlog::info("persona {} active", id);
  return result;
}

std::string PersonaService::deactivate() {
  std::lock_guard guard(activation_mutex_);
  auto id = store_.active_id();
  if (!id) throw Error(ErrorCode::NotFound, "no active persona");
  auto mutex = record_mutex(*id);
  std::lock_guard lock(*mutex);
  auto record = get(*id);
  auto disconnected = deps_.vpn->disconnect();
  if (!disconnected.ok) spdlog::warn("VPN disconnect failed: {}", disconnected.detail);
  std::filesystem::remove_all(profile_dir(*id));
  record.status = PersonaStatus::Complete;
  record.updated_at = now_text();
  store_.put(record);
  spdlog::info("persona {} deactivated", *id);
  return *id;
}

std::vector<Violation> PersonaService::violations(const std::string& id) const {
  return validate_persona(get(id).profile);
}

std::size_t PersonaService::record_observations(const std::vector<AdObservation>& batch) {
  for (const auto& o : batch) {
    require(!o.site.empty() && !o.persona_id.empty() && !o.ad_key.empty(), "observation has empty fields");
  }
  store_.add_observations(batch);
  return batch.size();
}

OverlapReport PersonaService::overlap_report() const { return build_report(store_.observations()); }

}  // namespace sandbox
