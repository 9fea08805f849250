#pragma once

#include <istream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sandbox/core/json.hpp"
#include "sandbox/core/error.hpp"

namespace sandbox {

/// One ad seen on a site while a persona was active.
struct AdObservation {
  std::string site;
  std::string persona_id;
  std::string ad_key;
  std::string observed_at;

  bool operator==(const AdObservation&) const = default;
};

/// Lowercase, trimmed, inner whitespace collapsed to single spaces.
std::string normalize_ad_key(std::string_view raw);

/// Lowercase host; a scheme, path, port or leading "www." is dropped.
std::string normalize_site(std::string_view raw);

/// Normalizes site and ad key. Throws PreconditionFailed when the site,
/// persona or ad key ends up empty.
AdObservation make_observation(std::string_view site, std::string_view persona_id, std::string_view ad_key,
                               std::string_view observed_at);

struct OverlapRow {
  std::string site;
  int duplicated_ads = 0;
  int total_ads = 0;
  std::int64_t rate_hundredths = 0;  // percent x 100, rounded half-up

  std::string rate_text() const;  // "46.81"
  bool operator==(const OverlapRow&) const = default;
};

/// Percent with two decimals as an integer number of hundredths, rounded
/// half-up. `total` must be positive.
std::int64_t percent_hundredths(std::int64_t part, std::int64_t total);
std::string format_hundredths(std::int64_t hundredths);

/// Distinct ad keys across personas, and how many of them were seen by two
/// or more personas. Site names are not inspected. Throws EmptyInput.
OverlapRow overlap_rate(std::span<const AdObservation> observations);

struct OverlapReport {
  std::vector<OverlapRow> rows;  // sorted by site

  bool operator==(const OverlapReport&) const = default;
};

OverlapReport build_report(std::span<const AdObservation> observations);

Json report_to_json(const OverlapReport& report);
OverlapReport report_from_json(const Json& json);

/// Columns: Website, Duplicated ads, Total ads, Overlap rate.
std::string render_report_table(const OverlapReport& report);

Json observation_to_json(const AdObservation& observation);
/// Accepts {site, persona_id, ad_key, observed_at}; normalizes on the way in.
AdObservation observation_from_json(const Json& json);

/// One JSON object per line; blank lines and lines starting with '#' are
/// skipped. Errors name the offending line.
std::vector<AdObservation> read_observations_jsonl(std::istream& in);

}  // namespace sandbox
