#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sandbox/core/attributes.hpp"
#include "sandbox/core/error.hpp"
#include "sandbox/core/types.hpp"
#include "sandbox/pipeline/templates.hpp"
#include "sandbox/providers/geocoder.hpp"
#include "sandbox/providers/text_provider.hpp"

namespace sandbox {

struct StageReport {
  Stage stage = Stage::Description;
  int attempts = 0;
  std::vector<std::string> violations_fixed;  // issue codes seen on rejected attempts
  std::vector<std::string> raw_responses;

  bool operator==(const StageReport&) const = default;
};

Json stage_report_to_json(const StageReport& report);
StageReport stage_report_from_json(const Json& json);

/// A stage that exhausted its attempts. The report lists every attempt.
class StageError : public Error {
 public:
  StageError(ErrorCode code, const std::string& message, StageReport report)
      : Error(code, message), report_(std::move(report)) {}

  const StageReport& report() const noexcept { return report_; }

 private:
  StageReport report_;
};

template <typename T>
struct StageResult {
  T value;
  StageReport report;
};

/// Context the posts stage needs beyond description and schedule.
struct PostContext {
  std::string timezone;
  std::string locale;
  std::string home_locality;  // "City, ST", last geocoding fallback
};

PostContext post_context_for(const PrivacyAttributes& attributes);

struct PipelineOptions {
  int max_attempts = 3;
  int max_tokens = 4500;
  double temperature = 0.9;
};

struct PersonaIdentity {
  std::string id;          // empty: derived from guidance and created_at
  std::string created_at;  // provenance timestamp, supplied by the caller
};

struct PipelineFailure {
  Stage stage;
  ErrorCode code;
  std::string message;
};

struct PipelineOutcome {
  PersonaProfile persona;
  std::vector<StageReport> reports;
  std::optional<PipelineFailure> failure;

  bool ok() const { return !failure.has_value(); }
};

/// Staged persona generation. Each stage renders its template with the
/// outputs of earlier stages, calls the provider, parses and checks the
/// response, and re-prompts with the rejection reasons until the attempt
/// budget runs out. Provider output is never silently repaired except for
/// the 30-word truncation of image prompts on the final attempt.
class GenerationPipeline {
 public:
  GenerationPipeline(TextProvider& provider, Geocoder& geocoder, TemplateSet templates,
                     PipelineOptions options = {});

  StageResult<std::string> generate_description(const GenerationGuidance& guidance);
  StageResult<PrivacyAttributes> parse_attributes(const std::string& description);
  StageResult<std::string> build_portrait_prompt(const std::string& description);
  StageResult<DeviceEnvironment> infer_device(const std::string& description);
  StageResult<std::vector<ScheduleEvent>> generate_schedule(const std::string& description, const DateRange& range);
  StageResult<std::vector<BrowsingEntry>> generate_browsing(const std::string& description,
                                                            std::span<const ScheduleEvent> schedule,
                                                            int entries_per_day, const DateRange& range);
  StageResult<std::vector<SocialPost>> generate_posts(const std::string& description,
                                                      std::span<const ScheduleEvent> schedule, int total,
                                                      const DateRange& range, const PostContext& context);
  StageResult<std::string> build_post_image_prompt(const std::string& content);

  /// Runs every stage in order. The first failing stage stops the run; the
  /// partial persona and all reports are returned.
  PipelineOutcome run_full_pipeline(const GenerationGuidance& guidance, const PersonaIdentity& identity);

  /// Re-runs one stage in place from the persona's earlier stages. Throws
  /// StageOrderViolated when an earlier stage is missing.
  StageReport run_stage(PersonaProfile& persona, Stage stage);

  const TemplateSet& templates() const { return templates_; }

  std::string render_prompt(std::string_view template_name, const std::map<std::string, std::string>& values) const;

 private:
  std::string call(const std::string& prompt);

  TextProvider& provider_;
  Geocoder& geocoder_;
  TemplateSet templates_;
  PipelineOptions options_;
};

/// Prompt context rendering of a schedule: [[start, end, "Label - address"], ...].
std::string schedule_context(std::span<const ScheduleEvent> schedule);

/// Number of images (0, 1 or 2) attached to a post, derived from a digest
/// of its time and content so replays are stable.
int image_count_for(const LocalDateTime& posted_at, std::string_view content);

/// "p-" + 16 hex digits of a digest over the guidance and timestamp.
std::string derive_persona_id(const GenerationGuidance& guidance, std::string_view created_at);

}  // namespace sandbox
