#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "sandbox/core/types.hpp"

namespace sandbox {

/// The eight editable fields of the ad-settings profile.
struct AdCenterProfile {
  std::string age_bracket;
  std::string gender;
  std::string language;
  std::string relationship_status;
  std::string household_income_bracket;
  std::string education;
  std::string industry;
  std::string homeownership;

  bool operator==(const AdCenterProfile&) const = default;
};

inline constexpr std::string_view kUnknownValue = "unknown";

struct AdProfileField {
  std::string_view name;   // key used in plans
  std::string_view label;  // aria-label on the settings page
};

inline constexpr std::array<AdProfileField, 8> kAdProfileFields = {{
    {"age", "Age"},
    {"gender", "Gender"},
    {"language", "Language"},
    {"relationship_status", "Relationship status"},
    {"household_income", "Household income"},
    {"education", "Education"},
    {"industry", "Industry"},
    {"homeownership", "Homeownership"},
}};

/// Field values in kAdProfileFields order.
std::array<std::string, 8> ad_profile_values(const AdCenterProfile& profile);

/// Allowed values of a field, "unknown" included. Empty for unknown fields.
std::vector<std::string_view> ad_field_vocabulary(std::string_view field);

std::string_view ad_field_label(std::string_view field);

/// Lower bound of each household income band, highest first, in USD.
struct IncomeBand {
  std::int64_t min_income;
  std::string_view label;
};
inline constexpr std::array<IncomeBand, 6> kIncomeBands = {{
    {212000, "top 10%"},
    {150000, "11-20%"},
    {120000, "21-30%"},
    {95000, "31-40%"},
    {75000, "41-50%"},
    {0, "lower 50%"},
}};

struct AdProfileMapping {
  AdCenterProfile profile;
  std::vector<std::string> unmapped;  // fields that fell back to "unknown"
};

/// Deterministic table-driven mapping. Values that fit no table entry are
/// logged and set to "unknown"; homeownership is always "unknown".
AdProfileMapping map_ad_center_profile(const PrivacyAttributes& attributes);

}  // namespace sandbox
