#include "sandbox/pipeline/pipeline.hpp"

#include <algorithm>
#include <map>
#include <variant>

#include <spdlog/spdlog.h>

#include "sandbox/core/attributes.hpp"
#include "sandbox/core/persona_json.hpp"
#include "sandbox/core/text.hpp"
#include "sandbox/core/timezone.hpp"
#include "sandbox/pipeline/lenient_json.hpp"
#include "sandbox/pipeline/responses.hpp"
#include "sandbox/providers/sha256.hpp"
#include "sandbox/validate/validator.hpp"

namespace sandbox {
namespace {

struct Issue {
  std::string code;
  std::string message;
  ErrorCode failure = ErrorCode::GenerationFailed;
};

using Issues = std::vector<Issue>;

template <typename T>
using Checked = std::variant<T, Issues>;

Issues issues_from(std::span<const Violation> violations, bool include_advisory) {
  Issues out;
  for (const auto& v : violations) {
    if (v.severity == Severity::Hard || include_advisory) {
      out.push_back({std::string(to_string(v.code)), v.subject + ": " + v.message});
    }
  }
  return out;
}

std::string correction_note(const Issues& issues) {
  std::string note = "\n\nYour previous answer was rejected for these reasons:\n";
  // Long violation lists are capped so the prompt stays bounded.
  std::size_t shown = std::min<std::size_t>(issues.size(), 10);
  for (std::size_t i = 0; i < shown; ++i) note += "- " + issues[i].code + ": " + issues[i].message + "\n";
  if (issues.size() > shown) note += "- and " + std::to_string(issues.size() - shown) + " more\n";
  note += "Return a corrected answer in the requested format.";
  return note;
}

std::string unquote(std::string_view text) {
  text = trim(text);
  if (text.size() >= 2 && (text.front() == '"' || text.front() == '\'') && text.back() == text.front()) {
    text = trim(text.substr(1, text.size() - 2));
  }
  return std::string(text);
}

Checked<std::string> check_image_prompt(const std::string& response, bool final_attempt, StageReport& report) {
  std::string prompt = unquote(response);
  if (prompt.empty()) return Issues{{"EmptyResponse", "image prompt is empty"}};
  if (word_count(prompt) <= kMaxImagePromptWords) return prompt;
  if (final_attempt) {
    report.violations_fixed.push_back("WordLimitTruncated");
    return first_words(prompt, kMaxImagePromptWords);
  }
  return Issues{{"WordLimit", "prompt has " + std::to_string(word_count(prompt)) + " words, limit is 30"}};
}

std::string street_only(std::string_view address) { return split_event_location(address).second; }

}  // namespace

Json stage_report_to_json(const StageReport& report) {
  return Json{{"stage", std::string(to_string(report.stage))},
              {"attempts", report.attempts},
              {"violations_fixed", report.violations_fixed},
              {"raw_responses", report.raw_responses}};
}

StageReport stage_report_from_json(const Json& json) {
  StageReport r;
  r.stage = parse_stage(json.at("stage").get<std::string>()).value_or(Stage::Description);
  r.attempts = json.at("attempts").get<int>();
  r.violations_fixed = json.at("violations_fixed").get<std::vector<std::string>>();
  r.raw_responses = json.at("raw_responses").get<std::vector<std::string>>();
  return r;
}

PostContext post_context_for(const PrivacyAttributes& attributes) {
  PostContext ctx;
  ctx.timezone = zone_for_state(attributes.state).value_or("");
  std::string language = to_lower(attributes.spoken_language);
  bool spanish_only = language.find("spanish") != std::string::npos && language.find("english") == std::string::npos;
  ctx.locale = spanish_only ? "es-US" : "en-US";
  ctx.home_locality = attributes.city + ", " + attributes.state;
  return ctx;
}

std::string schedule_context(std::span<const ScheduleEvent> schedule) {
  Json rows = Json::array();
  for (const auto& e : schedule) {
    rows.push_back(Json::array({format_datetime(e.start_time), format_datetime(e.end_time), join_event_location(e)}));
  }
  return rows.dump();
}

int image_count_for(const LocalDateTime& posted_at, std::string_view content) {
  std::string digest = sha256_hex(format_datetime(posted_at) + "\n" + std::string(content));
  int byte = std::stoi(digest.substr(0, 2), nullptr, 16);
  return byte % static_cast<int>(kMaxImagesPerPost + 1);
}

std::string derive_persona_id(const GenerationGuidance& guidance, std::string_view created_at) {
  return "p-" + sha256_hex(guidance_to_json(guidance).dump() + "|" + std::string(created_at)).substr(0, 16);
}

GenerationPipeline::GenerationPipeline(TextProvider& provider, Geocoder& geocoder, TemplateSet templates,
                                       PipelineOptions options)
    : provider_(provider), geocoder_(geocoder), templates_(std::move(templates)), options_(options) {
  require(options_.max_attempts >= 1, "max_attempts must be >= 1");
}

std::string GenerationPipeline::render_prompt(std::string_view template_name,
                                              const std::map<std::string, std::string>& values) const {
  return templates_.get(template_name).render(values);
}

std::string GenerationPipeline::call(const std::string& prompt) {
  return provider_.generate_text(TextGenerationRequest{prompt, options_.max_tokens, options_.temperature});
}

namespace {

// Shared attempt loop: render once, then re-prompt with the rejection
// reasons appended until the check accepts or the budget is spent.
template <typename T, typename Call, typename Check>
StageResult<T> run_attempts(Stage stage, int max_attempts, const std::string& base_prompt, Call&& call,
                            Check&& check) {
  StageReport report;
  report.stage = stage;
  Issues last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    report.attempts = attempt;
    std::string prompt = attempt == 1 ? base_prompt : base_prompt + correction_note(last);
    std::string response;
    try {
      response = call(prompt);
    } catch (const StageError&) {
      throw;
    } catch (const Error& e) {
      throw StageError(e.code(), std::string(to_string(stage)) + ": " + e.what(), report);
    }
    report.raw_responses.push_back(response);
    Checked<T> result = check(response, attempt == max_attempts, report);
    if (auto* value = std::get_if<T>(&result)) return StageResult<T>{std::move(*value), std::move(report)};
    last = std::get<Issues>(std::move(result));
    for (const auto& issue : last) report.violations_fixed.push_back(issue.code);
    spdlog::debug("stage {} attempt {} rejected: {}", to_string(stage), attempt, last.front().code);
  }
  std::string message = std::string(to_string(stage)) + " failed after " + std::to_string(max_attempts) +
                        " attempts: " + last.front().code + " (" + last.front().message + ")";
  throw StageError(last.front().failure, message, std::move(report));
}

}  // namespace

StageResult<std::string> GenerationPipeline::generate_description(const GenerationGuidance& guidance) {
  std::string seed(trim(guidance.text));
  auto prompt = render_prompt("description", {{"guidance", seed.empty() ? "none" : seed}});
  return run_attempts<std::string>(
      Stage::Description, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      [](const std::string& response, bool, StageReport&) -> Checked<std::string> {
        std::string text(trim(response));
        if (text.empty()) return Issues{{"EmptyResponse", "description is empty"}};
        if (has_paragraph_break(text)) {
          return Issues{{"MultiParagraph", "the profile must be a single paragraph"}};
        }
        return text;
      });
}

StageResult<PrivacyAttributes> GenerationPipeline::parse_attributes(const std::string& description) {
  require(!trim(description).empty(), "description must not be empty");
  auto prompt = render_prompt("attributes", {{"persona", description}});
  return run_attempts<PrivacyAttributes>(
      Stage::Attributes, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      [](const std::string& response, bool, StageReport&) -> Checked<PrivacyAttributes> {
        AttributeParse parsed;
        try {
          parsed = attributes_from_json(parse_lenient_json(response));
        } catch (const Error& e) {
          return Issues{{"MalformedAttributes", e.what(), ErrorCode::ParseFailed}};
        }
        if (!parsed.dropped_keys.empty()) {
          std::string keys;
          for (const auto& k : parsed.dropped_keys) keys += (keys.empty() ? "" : ", ") + k;
          spdlog::info("attributes: dropped unknown keys [{}]", keys);
        }
        Issues issues;
        for (auto problem : attribute_problems(parsed.attributes)) {
          if (problem == AttributeProblem::AgeOutOfRange) {
            issues.push_back({"AgeOutOfRange", "age " + std::to_string(parsed.attributes.age) + " is outside 18..70",
                              ErrorCode::InvariantViolated});
          } else {
            issues.push_back({"BirthdayAgeMismatch", "birthday year does not match age in 2023",
                              ErrorCode::InvariantViolated});
          }
        }
        if (!issues.empty()) return issues;
        return parsed.attributes;
      });
}

StageResult<std::string> GenerationPipeline::build_portrait_prompt(const std::string& description) {
  require(!trim(description).empty(), "description must not be empty");
  auto prompt = render_prompt("portrait_prompt", {{"description", description}});
  return run_attempts<std::string>(
      Stage::PortraitPrompt, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      check_image_prompt);
}

StageResult<std::string> GenerationPipeline::build_post_image_prompt(const std::string& content) {
  require(!trim(content).empty(), "post content must not be empty");
  auto prompt = render_prompt("post_image", {{"content", content}});
  return run_attempts<std::string>(
      Stage::Posts, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      check_image_prompt);
}

StageResult<DeviceEnvironment> GenerationPipeline::infer_device(const std::string& description) {
  require(!trim(description).empty(), "description must not be empty");
  auto prompt = render_prompt("device", {{"persona", description}});
  return run_attempts<DeviceEnvironment>(
      Stage::Device, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      [](const std::string& response, bool, StageReport&) -> Checked<DeviceEnvironment> {
        try {
          return parse_device_response(response);
        } catch (const Error& e) {
          return Issues{{"MalformedDevice", e.what(), ErrorCode::ParseFailed}};
        }
      });
}

StageResult<std::vector<ScheduleEvent>> GenerationPipeline::generate_schedule(const std::string& description,
                                                                              const DateRange& range) {
  require(range.valid(), "schedule date range is invalid");
  auto prompt = render_prompt("schedule", {{"description", description},
                                           {"start_date", format_date(range.start)},
                                           {"end_date", format_date(range.end)}});
  using Events = std::vector<ScheduleEvent>;
  return run_attempts<Events>(
      Stage::Schedule, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      [&range](const std::string& response, bool, StageReport&) -> Checked<Events> {
        Events events;
        try {
          events = parse_schedule_response(response);
        } catch (const Error& e) {
          return Issues{{"MalformedSchedule", e.what(), ErrorCode::ParseFailed}};
        }
        Issues issues;
        std::map<std::chrono::local_days, int> per_day;
        for (std::size_t i = 0; i < events.size(); ++i) {
          const auto& e = events[i];
          std::string subject = "schedule[" + std::to_string(i) + "]";
          if (e.start_time >= e.end_time) issues.push_back({"InvalidEvent", subject + ": start is not before end"});
          if (!has_locality(e.address)) issues.push_back({"AddressMissing", subject + ": no street-level address"});
          Date day = date_of(e.start_time);
          if (!range.contains(day)) issues.push_back({"ScheduleOutsideRange", subject + ": outside the date range"});
          ++per_day[std::chrono::local_days{day}];
        }
        for (Date day : range.each_day()) {
          if (!per_day.contains(std::chrono::local_days{day})) {
            issues.push_back({"DayMissing", "no events on " + format_date(day)});
          }
        }
        auto violations = validate_schedule(events);
        auto more = issues_from(violations, false);
        issues.insert(issues.end(), more.begin(), more.end());
        if (!issues.empty()) return issues;
        return events;
      });
}

StageResult<std::vector<BrowsingEntry>> GenerationPipeline::generate_browsing(const std::string& description,
                                                                              std::span<const ScheduleEvent> schedule,
                                                                              int entries_per_day,
                                                                              const DateRange& range) {
  require(range.valid(), "browsing date range is invalid");
  require(entries_per_day >= 1, "entries_per_day must be >= 1");
  require(!schedule.empty(), "browsing needs a schedule");
  auto prompt = render_prompt("browsing", {{"description", description},
                                           {"schedule", schedule_context(schedule)},
                                           {"number", std::to_string(entries_per_day * range.days())},
                                           {"start_date", format_date(range.start)},
                                           {"end_date", format_date(range.end)}});
  using Entries = std::vector<BrowsingEntry>;
  return run_attempts<Entries>(
      Stage::Browsing, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      [&](const std::string& response, bool, StageReport&) -> Checked<Entries> {
        Entries entries;
        try {
          entries = parse_browsing_response(response);
        } catch (const Error& e) {
          return Issues{{"MalformedBrowsing", e.what(), ErrorCode::ParseFailed}};
        }
        Issues issues;
        std::map<std::chrono::local_days, int> per_day;
        for (std::size_t i = 0; i < entries.size(); ++i) {
          const auto& e = entries[i];
          std::string subject = "browsing[" + std::to_string(i) + "]";
          if (trim(e.title).empty()) issues.push_back({"InvalidEntry", subject + ": empty title"});
          if (!is_absolute_url(e.url)) issues.push_back({"InvalidEntry", subject + ": \"" + e.url + "\" is not absolute"});
          ++per_day[std::chrono::local_days{date_of(e.visited_at)}];
        }
        auto more = issues_from(validate_browsing(entries, schedule, range), false);
        issues.insert(issues.end(), more.begin(), more.end());
        // Entries per day within 20% of the request.
        for (Date day : range.each_day()) {
          int count = per_day[std::chrono::local_days{day}];
          if (count * 5 < entries_per_day * 4 || count * 5 > entries_per_day * 6) {
            issues.push_back({"BrowsingCount", format_date(day) + " has " + std::to_string(count) +
                                                   " entries, expected about " + std::to_string(entries_per_day)});
          }
        }
        if (!issues.empty()) return issues;
        return entries;
      });
}

StageResult<std::vector<SocialPost>> GenerationPipeline::generate_posts(const std::string& description,
                                                                        std::span<const ScheduleEvent> schedule,
                                                                        int total, const DateRange& range,
                                                                        const PostContext& context) {
  require(range.valid(), "posts date range is invalid");
  require(total >= 1, "posts total must be >= 1");
  require(!schedule.empty(), "posts need a schedule");
  auto prompt = render_prompt("posts", {{"profile", description},
                                        {"schedule", schedule_context(schedule)},
                                        {"num", std::to_string(total)},
                                        {"start_date", format_date(range.start)},
                                        {"end_date", format_date(range.end)}});
  auto drafts = run_attempts<std::vector<PostDraft>>(
      Stage::Posts, options_.max_attempts, prompt, [this](const std::string& p) { return call(p); },
      [&](const std::string& response, bool, StageReport&) -> Checked<std::vector<PostDraft>> {
        std::vector<PostDraft> parsed;
        try {
          parsed = parse_posts_response(response);
        } catch (const Error& e) {
          return Issues{{"MalformedPosts", e.what(), ErrorCode::ParseFailed}};
        }
        Issues issues;
        if (static_cast<int>(parsed.size()) != total) {
          issues.push_back({"PostCount", "got " + std::to_string(parsed.size()) + " posts, expected " +
                                             std::to_string(total)});
        }
        std::vector<SocialPost> probe;
        for (std::size_t i = 0; i < parsed.size(); ++i) {
          if (!range.contains(date_of(parsed[i].posted_at))) {
            issues.push_back({"PostOutsideRange", "posts[" + std::to_string(i) + "]: outside the date range"});
          }
          SocialPost p;
          p.posted_at = parsed[i].posted_at;
          p.address = parsed[i].address;
          p.content = parsed[i].content;
          probe.push_back(std::move(p));
        }
        // Location mismatches are only advisory for the validator but the
        // generator asks for posts anchored to the schedule, so they retry.
        auto more = issues_from(validate_posts(probe, schedule), true);
        issues.insert(issues.end(), more.begin(), more.end());
        if (!issues.empty()) return issues;
        return parsed;
      });

  std::vector<SocialPost> posts;
  for (auto& draft : drafts.value) {
    SocialPost post;
    post.posted_at = draft.posted_at;
    post.address = draft.address;
    post.content = draft.content;
    post.timezone = draft.timezone.empty() ? context.timezone : draft.timezone;
    post.locale = draft.locale.empty() ? context.locale : draft.locale;
    try {
      GeoPoint where;
      if (draft.location && draft.location->valid()) {
        where = *draft.location;
      } else {
        try {
          where = geocoder_.geocode(street_only(draft.address));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::NotFound || context.home_locality.empty()) throw;
          where = geocoder_.geocode(context.home_locality);
        }
      }
      post.latitude = where.latitude;
      post.longitude = where.longitude;
      int images = image_count_for(post.posted_at, post.content);
      if (images > 0) {
        auto image_prompt = build_post_image_prompt(post.content);
        for (int i = 0; i < images; ++i) post.images.push_back(image_prompt.value);
        drafts.report.raw_responses.insert(drafts.report.raw_responses.end(),
                                           image_prompt.report.raw_responses.begin(),
                                           image_prompt.report.raw_responses.end());
      }
    } catch (const StageError& e) {
      throw StageError(e.code(), e.what(), drafts.report);
    } catch (const Error& e) {
      throw StageError(e.code(), std::string("posts: ") + e.what(), drafts.report);
    }
    posts.push_back(std::move(post));
  }
  return {std::move(posts), std::move(drafts.report)};
}

StageReport GenerationPipeline::run_stage(PersonaProfile& persona, Stage stage) {
  for (Stage earlier : kAllStages) {
    if (earlier == stage) break;
    if (!persona.has_stage(earlier)) {
      throw Error(ErrorCode::StageOrderViolated, "stage " + std::string(to_string(stage)) + " needs " +
                                                     std::string(to_string(earlier)) + " first");
    }
  }
  const auto& range = persona.guidance.date_range;
  switch (stage) {
    case Stage::Description: {
      auto r = generate_description(persona.guidance);
      persona.description = std::move(r.value);
      return r.report;
    }
    case Stage::Attributes: {
      auto r = parse_attributes(persona.description);
      persona.attributes = std::move(r.value);
      return r.report;
    }
    case Stage::PortraitPrompt: {
      auto r = build_portrait_prompt(persona.description);
      persona.portrait_prompt = std::move(r.value);
      return r.report;
    }
    case Stage::Device: {
      auto r = infer_device(persona.description);
      persona.device = std::move(r.value);
      return r.report;
    }
    case Stage::Schedule: {
      auto r = generate_schedule(persona.description, range);
      persona.schedule = std::move(r.value);
      return r.report;
    }
    case Stage::Browsing: {
      auto r = generate_browsing(persona.description, persona.schedule, persona.guidance.browsing_entries_per_day,
                                 range);
      persona.browsing = std::move(r.value);
      return r.report;
    }
    case Stage::Posts: {
      auto r = generate_posts(persona.description, persona.schedule, persona.guidance.posts_total, range,
                              post_context_for(*persona.attributes));
      persona.posts = std::move(r.value);
      return r.report;
    }
  }
  throw Error(ErrorCode::PreconditionFailed, "unknown stage");
}

PipelineOutcome GenerationPipeline::run_full_pipeline(const GenerationGuidance& guidance,
                                                      const PersonaIdentity& identity) {
  check_guidance(guidance);
  PipelineOutcome outcome;
  auto& persona = outcome.persona;
  persona.guidance = guidance;
  persona.id = identity.id.empty() ? derive_persona_id(guidance, identity.created_at) : identity.id;
  persona.provenance = {provider_.id(), templates_.version(), identity.created_at};
  for (Stage stage : kAllStages) {
    try {
      outcome.reports.push_back(run_stage(persona, stage));
    } catch (const StageError& e) {
      outcome.reports.push_back(e.report());
      outcome.failure = PipelineFailure{stage, e.code(), e.what()};
      break;
    } catch (const Error& e) {
      outcome.failure = PipelineFailure{stage, e.code(), e.what()};
      break;
    }
  }
  return outcome;
}

}  // namespace sandbox
