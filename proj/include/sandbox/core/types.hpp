#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sandbox/core/datetime.hpp"

namespace sandbox {

inline constexpr int kReferenceYear = 2023;
inline constexpr int kMinAge = 18;
inline constexpr int kMaxAge = 70;
inline constexpr std::size_t kMaxPostWords = 140;
inline constexpr std::size_t kMaxImagePromptWords = 30;
inline constexpr std::size_t kMaxImagesPerPost = 2;

struct GenerationGuidance {
  std::string text;
  DateRange date_range;
  int browsing_entries_per_day = 15;
  int posts_total = 6;

  bool operator==(const GenerationGuidance&) const = default;
};

/// Throws PreconditionFailed when the range is inverted, longer than two
/// weeks, or a requested count is not positive.
void check_guidance(const GenerationGuidance& guidance);

struct GeoPoint {
  double latitude = 0.0;
  double longitude = 0.0;

  bool valid() const;
  bool operator==(const GeoPoint&) const = default;
};

struct PrivacyAttributes {
  std::string first_name;
  std::string last_name;
  int age = 0;
  std::string gender;
  std::string race;
  std::string street;
  std::string city;
  std::string state;
  std::string zip_code;
  std::string spoken_language;
  std::string educational_background;
  Date birthday{};
  std::string job;
  std::int64_t income = 0;
  std::string marital_status;
  std::string parental_status;
  std::string online_behavior;

  std::string home_address() const;
  bool operator==(const PrivacyAttributes&) const = default;
};

struct DeviceEnvironment {
  std::string device_name;
  std::string browser_name;
  std::string user_agent;

  bool operator==(const DeviceEnvironment&) const = default;
};

/// True when the user agent names the browser (Edge is "Edg/" in real UAs).
bool user_agent_mentions(std::string_view user_agent, std::string_view browser);

struct ScheduleEvent {
  LocalDateTime start_time;
  LocalDateTime end_time;
  std::string event_label;
  std::string address;

  bool operator==(const ScheduleEvent&) const = default;
};

/// Splits "Golds Gym - 1220 Howell St, Seattle, WA 98101" into label and
/// address. Text without the separator is treated as a bare address.
std::pair<std::string, std::string> split_event_location(std::string_view text);
std::string join_event_location(const ScheduleEvent& event);

/// An address has a city/state component when something follows the
/// street line after a comma.
bool has_locality(std::string_view address);

struct BrowsingEntry {
  LocalDateTime visited_at;
  std::string title;
  std::string url;

  bool operator==(const BrowsingEntry&) const = default;
};

/// Absolute URL check: scheme "://" host.
bool is_absolute_url(std::string_view url);

struct SocialPost {
  LocalDateTime posted_at;
  std::string address;
  std::string content;
  std::vector<std::string> images;
  double latitude = 0.0;
  double longitude = 0.0;
  std::string timezone;
  std::string locale;

  bool operator==(const SocialPost&) const = default;
};

struct Provenance {
  std::string generator_id;
  std::string prompt_template_version;
  std::string created_at;

  bool operator==(const Provenance&) const = default;
};

enum class Stage {
  Description,
  Attributes,
  PortraitPrompt,
  Device,
  Schedule,
  Browsing,
  Posts,
};

inline constexpr std::array<Stage, 7> kAllStages = {
    Stage::Description, Stage::Attributes, Stage::PortraitPrompt, Stage::Device,
    Stage::Schedule,    Stage::Browsing,   Stage::Posts};

std::string_view to_string(Stage stage);
std::optional<Stage> parse_stage(std::string_view name);

struct PersonaProfile {
  std::string id;
  GenerationGuidance guidance;
  std::string description;
  std::optional<PrivacyAttributes> attributes;
  std::string portrait_prompt;
  std::optional<DeviceEnvironment> device;
  std::vector<ScheduleEvent> schedule;
  std::vector<BrowsingEntry> browsing;
  std::vector<SocialPost> posts;
  Provenance provenance;

  bool has_stage(Stage stage) const;
  void clear_stage(Stage stage);
  bool operator==(const PersonaProfile&) const = default;
};

}  // namespace sandbox
