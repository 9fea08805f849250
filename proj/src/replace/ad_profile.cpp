#include "sandbox/replace/ad_profile.hpp"

#include <algorithm>
#include <cctype>

#include <spdlog/spdlog.h>

#include "sandbox/core/text.hpp"

namespace sandbox {
namespace {

struct Rule {
  std::string_view value;
  std::vector<std::string_view> terms;  // any term matches; terms are word sequences
};

const std::vector<std::string_view> kAgeBrackets = {"18-24", "25-34", "35-44", "45-54", "55-64", "65+"};

const std::vector<Rule> kGenderRules = {
    {"female", {"female", "woman", "f"}},
    {"male", {"male", "man", "m"}},
    {"non-binary", {"non-binary", "nonbinary", "non binary"}},
};

const std::vector<Rule> kLanguageRules = {
    {"english", {"english"}},       {"spanish", {"spanish"}},       {"chinese", {"chinese", "mandarin", "cantonese"}},
    {"tagalog", {"tagalog", "filipino"}}, {"vietnamese", {"vietnamese"}}, {"arabic", {"arabic"}},
    {"french", {"french"}},         {"korean", {"korean"}},         {"russian", {"russian"}},
    {"german", {"german"}},         {"hindi", {"hindi"}},           {"portuguese", {"portuguese"}},
    {"japanese", {"japanese"}},     {"italian", {"italian"}},
};

// The settings page offers four statuses; divorced, separated and widowed
// people are listed as single there.
const std::vector<Rule> kRelationshipRules = {
    {"single", {"single", "never married", "unmarried", "not married", "divorced", "separated", "widowed", "widow",
                "widower"}},
    {"engaged", {"engaged"}},
    {"in a relationship", {"in a relationship", "partner", "partnered", "dating", "domestic partnership"}},
    {"married", {"married"}},
};

// Highest level first; the first hit wins.
const std::vector<Rule> kEducationRules = {
    {"doctorate", {"phd", "ph.d", "ph.d.", "doctorate", "doctoral", "md", "m.d.", "jd", "j.d."}},
    {"master's degree", {"master's", "masters", "master", "mba", "m.s.", "msc", "m.a."}},
    {"bachelor's degree", {"bachelor's", "bachelors", "bachelor", "b.s.", "b.a.", "ba", "bs", "college degree"}},
    {"associate degree", {"associate's", "associate", "associates"}},
    {"some college", {"some college"}},
    {"high school", {"high school", "ged", "diploma"}},
};

const std::vector<Rule> kIndustryRules = {
    {"finance", {"financial", "finance", "accountant", "accounting", "bank", "banker", "banking", "investment",
                 "actuary", "auditor", "insurance", "loan"}},
    {"technology", {"software", "developer", "programmer", "it", "data scientist", "web", "computer", "cybersecurity",
                    "devops", "tech"}},
    {"healthcare", {"nurse", "physician", "doctor", "medical", "pharmacist", "pharmacy", "dentist", "therapist",
                    "healthcare", "clinic", "hospital", "paramedic", "caregiver"}},
    {"education", {"teacher", "professor", "tutor", "school", "educator", "lecturer", "librarian", "principal"}},
    {"legal", {"lawyer", "attorney", "paralegal", "legal", "judge"}},
    {"marketing & advertising", {"marketing", "advertising", "brand", "public relations", "social media"}},
    {"arts & media", {"designer", "artist", "writer", "journalist", "photographer", "musician", "editor", "actor",
                      "media", "filmmaker", "animator"}},
    {"science & research", {"scientist", "research", "researcher", "laboratory", "lab", "chemist", "biologist",
                            "psychologist", "psychology"}},
    {"retail", {"retail", "cashier", "store", "sales associate", "merchandiser"}},
    {"hospitality & food service", {"chef", "cook", "restaurant", "barista", "waiter", "waitress", "server", "hotel",
                                    "bartender", "hospitality"}},
    {"construction", {"construction", "carpenter", "electrician", "plumber", "contractor", "builder"}},
    {"manufacturing", {"manufacturing", "factory", "machinist", "assembly", "production"}},
    {"transportation & logistics", {"driver", "pilot", "logistics", "warehouse", "delivery", "trucker", "courier"}},
    {"real estate", {"real estate", "realtor", "property manager"}},
    {"government & public service", {"government", "police", "firefighter", "military", "civil servant",
                                      "social worker"}},
    {"engineering", {"engineer", "engineering", "architect"}},
    {"sales", {"sales", "salesperson", "account executive"}},
};

std::vector<std::string> tokens_of(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  for (char raw : text) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(raw)));
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '\'' || c == '.' || c == '-') {
      current += c;
    } else if (!current.empty()) {
      out.push_back(current);
      current.clear();
    }
  }
  if (!current.empty()) out.push_back(current);
  // Sentence periods stick to the preceding word; abbreviations keep theirs.
  for (auto& t : out) {
    if (t.size() > 1 && t.back() == '.' && std::count(t.begin(), t.end(), '.') == 1) t.pop_back();
  }
  return out;
}

bool has_term(const std::vector<std::string>& tokens, std::string_view term) {
  auto parts = tokens_of(term);
  if (parts.empty() || parts.size() > tokens.size()) return false;
  for (std::size_t i = 0; i + parts.size() <= tokens.size(); ++i) {
    if (std::equal(parts.begin(), parts.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) return true;
  }
  return false;
}

std::string_view first_rule(const std::vector<Rule>& rules, std::string_view text) {
  auto tokens = tokens_of(text);
  for (const auto& rule : rules) {
    for (auto term : rule.terms) {
      if (has_term(tokens, term)) return rule.value;
    }
  }
  return {};
}

// Earliest mention in the text wins, so "English and Spanish" maps to English.
std::string_view earliest_rule(const std::vector<Rule>& rules, std::string_view text) {
  auto tokens = tokens_of(text);
  std::string_view best;
  std::size_t best_pos = tokens.size();
  for (const auto& rule : rules) {
    for (auto term : rule.terms) {
      auto parts = tokens_of(term);
      for (std::size_t i = 0; i + parts.size() <= tokens.size() && i < best_pos; ++i) {
        if (std::equal(parts.begin(), parts.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
          best = rule.value;
          best_pos = i;
          break;
        }
      }
    }
  }
  return best;
}

std::vector<std::string_view> values_of(const std::vector<Rule>& rules) {
  std::vector<std::string_view> out;
  for (const auto& r : rules) out.push_back(r.value);
  return out;
}

}  // namespace

std::array<std::string, 8> ad_profile_values(const AdCenterProfile& p) {
  return {p.age_bracket, p.gender,   p.language, p.relationship_status, p.household_income_bracket,
          p.education,   p.industry, p.homeownership};
}

std::vector<std::string_view> ad_field_vocabulary(std::string_view field) {
  std::vector<std::string_view> out;
  if (field == "age") {
    out = kAgeBrackets;
  } else if (field == "gender") {
    out = values_of(kGenderRules);
  } else if (field == "language") {
    out = values_of(kLanguageRules);
  } else if (field == "relationship_status") {
    out = values_of(kRelationshipRules);
  } else if (field == "household_income") {
    for (const auto& band : kIncomeBands) out.push_back(band.label);
  } else if (field == "education") {
    out = values_of(kEducationRules);
  } else if (field == "industry") {
    out = values_of(kIndustryRules);
  } else if (field != "homeownership") {
    return {};
  }
  out.push_back(kUnknownValue);
  return out;
}

std::string_view ad_field_label(std::string_view field) {
  for (const auto& f : kAdProfileFields) {
    if (f.name == field) return f.label;
  }
  return {};
}

AdProfileMapping map_ad_center_profile(const PrivacyAttributes& a) {
  AdProfileMapping out;
  auto& p = out.profile;
  auto set = [&out](std::string& slot, std::string_view field, std::string_view value, std::string_view source) {
    if (value.empty()) {
      spdlog::warn("ad profile: cannot map {} value \"{}\"", field, source);
      out.unmapped.emplace_back(field);
      slot = std::string(kUnknownValue);
    } else {
      slot = std::string(value);
    }
  };

  std::string_view age;
  if (a.age >= 18) {
    static constexpr int kLower[] = {18, 25, 35, 45, 55, 65};
    for (std::size_t i = 0; i < kAgeBrackets.size(); ++i) {
      if (a.age >= kLower[i]) age = kAgeBrackets[i];
    }
  }
  set(p.age_bracket, "age", age, std::to_string(a.age));
  set(p.gender, "gender", first_rule(kGenderRules, a.gender), a.gender);
  set(p.language, "language", earliest_rule(kLanguageRules, a.spoken_language), a.spoken_language);
  set(p.relationship_status, "relationship_status", first_rule(kRelationshipRules, a.marital_status),
      a.marital_status);

  std::string_view income;
  if (a.income >= 0) {
    for (const auto& band : kIncomeBands) {
      if (a.income >= band.min_income) {
        income = band.label;
        break;
      }
    }
  }
  set(p.household_income_bracket, "household_income", income, std::to_string(a.income));
  set(p.education, "education", first_rule(kEducationRules, a.educational_background), a.educational_background);
  set(p.industry, "industry", first_rule(kIndustryRules, a.job), a.job);
  p.homeownership = std::string(kUnknownValue);
  return out;
}

}  // namespace sandbox
