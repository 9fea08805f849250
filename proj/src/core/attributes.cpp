#include "sandbox/core/attributes.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>

#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"

namespace sandbox {
namespace {

std::string value_text(const Json& object, std::string_view key) {
  auto it = object.find(std::string(key));
  if (it == object.end()) {
    throw Error(ErrorCode::ParseFailed, "attribute \"" + std::string(key) + "\" is missing");
  }
  std::string text;
  if (it->is_string()) {
    text = std::string(trim(it->get<std::string>()));
  } else if (it->is_number_integer()) {
    text = std::to_string(it->get<std::int64_t>());
  } else if (it->is_number()) {
    text = std::to_string(static_cast<std::int64_t>(it->get<double>()));
  } else {
    throw Error(ErrorCode::ParseFailed, "attribute \"" + std::string(key) + "\" is not text");
  }
  if (text.empty()) {
    throw Error(ErrorCode::ParseFailed, "attribute \"" + std::string(key) + "\" is empty");
  }
  return text;
}

int parse_age(const std::string& text) {
  int age = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), age);
  if (ec != std::errc{} || ptr == text.data()) {
    throw Error(ErrorCode::ParseFailed, "age \"" + text + "\" is not an integer");
  }
  return age;
}

std::string canonical_key(std::string_view key) {
  std::string out = to_lower(trim(key));
  std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

}  // namespace

std::optional<std::int64_t> parse_income(std::string_view text) {
  std::string digits;
  text = trim(text);
  if (auto pos = to_lower(text).find("usd"); pos != std::string::npos) text = text.substr(0, pos);
  bool fraction = false;
  for (char c : text) {
    if (c == '$' || c == ',' || c == ' ') continue;
    if (c == '.') {
      fraction = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    if (!fraction) digits += c;
  }
  if (digits.empty() || digits.size() > 15) return std::nullopt;
  return std::strtoll(digits.c_str(), nullptr, 10);
}

std::string format_income(std::int64_t income) {
  std::string raw = std::to_string(income < 0 ? -income : income);
  std::string out;
  int n = static_cast<int>(raw.size());
  for (int i = 0; i < n; ++i) {
    out += raw[i];
    int remaining = n - i - 1;
    if (remaining > 0 && remaining % 3 == 0) out += ',';
  }
  return income < 0 ? "-" + out : out;
}

AttributeParse attributes_from_json(const Json& input) {
  if (!input.is_object()) throw Error(ErrorCode::ParseFailed, "attributes are not an object");
  Json object = Json::object();
  AttributeParse result;
  for (const auto& [key, value] : input.items()) {
    std::string canon = canonical_key(key);
    bool known = std::find(kAttributeKeys.begin(), kAttributeKeys.end(), canon) != kAttributeKeys.end();
    if (known) {
      object[canon] = value;
    } else {
      result.dropped_keys.push_back(key);
    }
  }
  auto& a = result.attributes;
  a.first_name = value_text(object, "first name");
  a.last_name = value_text(object, "last name");
  a.age = parse_age(value_text(object, "age"));
  a.gender = value_text(object, "gender");
  a.race = value_text(object, "race");
  a.street = value_text(object, "street");
  a.city = value_text(object, "city");
  a.state = value_text(object, "state");
  a.zip_code = value_text(object, "zip code");
  a.spoken_language = value_text(object, "spoken language");
  a.educational_background = value_text(object, "educational background");
  std::string birthday = value_text(object, "birthday");
  auto date = parse_us_date(birthday);
  if (!date) date = parse_date(birthday);
  if (!date) throw Error(ErrorCode::ParseFailed, "birthday \"" + birthday + "\" is not MM/DD/YYYY");
  a.birthday = *date;
  a.job = value_text(object, "job");
  std::string income = value_text(object, "income");
  auto amount = parse_income(income);
  if (!amount) throw Error(ErrorCode::ParseFailed, "income \"" + income + "\" is not a dollar amount");
  a.income = *amount;
  a.marital_status = value_text(object, "marital status");
  a.parental_status = value_text(object, "parental status");
  a.online_behavior = value_text(object, "online behavior");
  return result;
}

Json attributes_to_json(const PrivacyAttributes& a) {
  Json j = Json::object();
  j["first name"] = a.first_name;
  j["last name"] = a.last_name;
  j["age"] = std::to_string(a.age);
  j["gender"] = a.gender;
  j["race"] = a.race;
  j["street"] = a.street;
  j["city"] = a.city;
  j["state"] = a.state;
  j["zip code"] = a.zip_code;
  j["spoken language"] = a.spoken_language;
  j["educational background"] = a.educational_background;
  j["birthday"] = format_us_date(a.birthday);
  j["job"] = a.job;
  j["income"] = format_income(a.income);
  j["marital status"] = a.marital_status;
  j["parental status"] = a.parental_status;
  j["online behavior"] = a.online_behavior;
  return j;
}

std::vector<AttributeProblem> attribute_problems(const PrivacyAttributes& a) {
  std::vector<AttributeProblem> problems;
  if (a.age < kMinAge || a.age > kMaxAge) problems.push_back(AttributeProblem::AgeOutOfRange);
  int implied = kReferenceYear - static_cast<int>(a.birthday.year());
  if (std::abs(implied - a.age) > 1) problems.push_back(AttributeProblem::BirthdayAgeMismatch);
  return problems;
}

PrivacyAttributes apply_attribute_patch(const PrivacyAttributes& base, const Json& patch) {
  if (!patch.is_object()) throw Error(ErrorCode::InvariantViolated, "patch must be an object");
  Json merged = attributes_to_json(base);
  for (const auto& [key, value] : patch.items()) {
    std::string canon = canonical_key(key);
    if (std::find(kAttributeKeys.begin(), kAttributeKeys.end(), canon) == kAttributeKeys.end()) {
      throw Error(ErrorCode::InvariantViolated, "unknown attribute \"" + key + "\"");
    }
    merged[canon] = value;
  }
  PrivacyAttributes patched;
  try {
    patched = attributes_from_json(merged).attributes;
  } catch (const Error& e) {
    throw Error(ErrorCode::InvariantViolated, e.what());
  }
  for (auto problem : attribute_problems(patched)) {
    if (problem == AttributeProblem::AgeOutOfRange) {
      throw Error(ErrorCode::InvariantViolated,
                  "age " + std::to_string(patched.age) + " is outside 18..70");
    }
    throw Error(ErrorCode::InvariantViolated, "birthday year does not match age");
  }
  return patched;
}

}  // namespace sandbox
