#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sandbox/core/json.hpp"
#include "sandbox/core/types.hpp"

namespace sandbox {

/// The seventeen attribute keys, in the order the extraction prompt lists them.
inline constexpr std::array<std::string_view, 17> kAttributeKeys = {
    "first name",      "last name",
    "age",             "gender",
    "race",            "street",
    "city",            "state",
    "zip code",        "spoken language",
    "educational background", "birthday",
    "job",             "income",
    "marital status",  "parental status",
    "online behavior"};

/// "85,000", "$85,000" and "85000" all yield 85000.
std::optional<std::int64_t> parse_income(std::string_view text);
/// 85000 -> "85,000".
std::string format_income(std::int64_t income);

struct AttributeParse {
  PrivacyAttributes attributes;
  std::vector<std::string> dropped_keys;
};

/// Reads the 17-key object. Values may be strings or numbers. Unknown keys
/// are reported in dropped_keys. Throws ParseFailed on a missing, empty or
/// malformed value.
AttributeParse attributes_from_json(const Json& object);

/// Renders the 17-key object with every value as a string.
Json attributes_to_json(const PrivacyAttributes& attributes);

enum class AttributeProblem { AgeOutOfRange, BirthdayAgeMismatch };

std::vector<AttributeProblem> attribute_problems(const PrivacyAttributes& attributes);

/// Applies a partial 17-key patch; unknown keys throw InvariantViolated.
PrivacyAttributes apply_attribute_patch(const PrivacyAttributes& base, const Json& patch);

}  // namespace sandbox
