#pragma once

#include <condition_variable>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "sandbox/pipeline/pipeline.hpp"
#include "sandbox/replace/driver.hpp"
#include "sandbox/replace/executor.hpp"
#include "sandbox/service/store.hpp"
#include "sandbox/validate/validator.hpp"

namespace sandbox {

/// Fixed-size worker pool running queued closures in FIFO order.
class JobQueue {
 public:
  explicit JobQueue(std::size_t workers);
  ~JobQueue();
  JobQueue(const JobQueue&) = delete;
  JobQueue& operator=(const JobQueue&) = delete;

  void submit(std::function<void()> job);
  /// Blocks until the queue is empty and no job is running.
  void wait_idle();

 private:
  void run();

  std::mutex mutex_;
  std::condition_variable work_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::function<void()>> queue_;
  std::size_t running_ = 0;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

using DriverFactory = std::function<std::unique_ptr<BrowserDriver>(const std::string& endpoint)>;

struct ServiceDeps {
  TextProvider* provider = nullptr;
  Geocoder* geocoder = nullptr;
  TemplateSet templates = TemplateSet::builtin();
  PipelineOptions pipeline;
  std::vector<VpnServer> vpn_servers;
  DriverFactory driver_factory;
  VpnClient* vpn = nullptr;
  std::string default_driver = "scripted";
  std::filesystem::path sandbox_root = "sandbox-profiles";
  std::size_t workers = 2;
  std::function<UtcDateTime()> clock;  // defaults to the system clock
};

struct ActivationResult {
  ActivationPlan plan;
  ExecutionLog log;
};

/// Persona lifecycle over the store: background generation, attribute
/// edits with stage staleness, single-stage regeneration, and exclusive
/// activation of one persona at a time.
class PersonaService {
 public:
  PersonaService(PersonaStore& store, ServiceDeps deps);
  ~PersonaService();

  /// Validates guidance, stores a draft record and queues the pipeline run.
  std::string create_persona(const GenerationGuidance& guidance);
  void wait_idle() { jobs_.wait_idle(); }

  PersonaRecord get(const std::string& id) const;
  std::vector<PersonaRecord> list() const { return store_.list(); }

  /// Applies a 17-key attribute patch and marks schedule, browsing and
  /// posts stale.
  PersonaRecord update_attributes(const std::string& id, const Json& patch);

  /// Re-runs one stage synchronously; later stages become stale.
  PersonaRecord regenerate_stage(const std::string& id, Stage stage);

  ActivationResult activate(const std::string& id, const std::string& driver_endpoint = {});
  /// Returns the id of the persona that was active.
  std::string deactivate();

  std::vector<Violation> violations(const std::string& id) const;

  /// All-or-nothing: one bad observation rejects the batch.
  std::size_t record_observations(const std::vector<AdObservation>& batch);
  OverlapReport overlap_report() const;

  std::filesystem::path profile_dir(const std::string& id) const;
  std::string now_text() const;

 private:
  void run_generation(const std::string& id);
  std::shared_ptr<std::mutex> record_mutex(const std::string& id);
  GenerationPipeline make_pipeline();

  PersonaStore& store_;
  ServiceDeps deps_;
  std::mutex ids_mutex_;
  std::unordered_map<std::string, std::shared_ptr<std::mutex>> record_mutexes_;
  std::mutex activation_mutex_;
  std::uint64_t sequence_ = 0;
  JobQueue jobs_;  // last member: workers stop before the rest is destroyed
};

}  // namespace sandbox
