#pragma once

// Shared by the unit tests and the acceptance runner: fixture paths,
// random generators and brute-force oracles written independently of the
// library code they check.

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "sandbox/core/types.hpp"
#include "sandbox/providers/geocoder.hpp"
#include "sandbox/replace/vpn.hpp"
#include "sandbox/validate/validator.hpp"

namespace sbxtest {

using namespace sandbox;

std::filesystem::path source_dir();
std::filesystem::path fixture_path(const std::string& relative);
std::string read_file(const std::filesystem::path& path);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "sbx");
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

GenerationGuidance carlos_guidance();

/// Expected record for the few-shot Abigail attribute response.
PrivacyAttributes abigail_attributes();

/// Geocoder answering every address with a fixed point.
class ConstantGeocoder : public Geocoder {
 public:
  explicit ConstantGeocoder(GeoPoint point) : point_(point) {}
  GeoPoint geocode(std::string_view) override { return point_; }

 private:
  GeoPoint point_;
};

// ---- calendar and geometry oracles ----

/// Days from 1601-01-01 by walking whole years and months.
std::int64_t days_since_1601(int year, unsigned month, unsigned day);
std::int64_t webkit_oracle(int year, unsigned month, unsigned day, int hour, int minute, int second);

/// Spherical law of cosines.
double great_circle_km(GeoPoint a, GeoPoint b);

/// Sorts every server by (distance bucket, load, id) after computing all
/// distances; returns the winner's id.
std::string vpn_oracle(GeoPoint point, const std::vector<VpnServer>& servers);

// ---- validator oracles ----

using Finding = std::pair<std::string, std::string>;  // code name, subject

std::vector<Finding> findings_of(const std::vector<Violation>& violations);
std::vector<Finding> schedule_oracle(const std::vector<ScheduleEvent>& events);
std::vector<Finding> browsing_oracle(const std::vector<BrowsingEntry>& entries, const std::string& first_day,
                                     const std::string& last_day);

/// Street pool whose street lines never contain one another, so a post
/// matches an event exactly when both use the same pool entry.
const std::vector<std::string>& address_pool();
std::vector<Finding> posts_oracle(const std::vector<SocialPost>& posts, const std::vector<ScheduleEvent>& schedule);

/// Per start date, every second of [first start, last end) covered exactly
/// once by the day's events.
bool coverage_exact(const std::vector<ScheduleEvent>& events);

// ---- generators ----

LocalDateTime local(int y, unsigned m, unsigned d, int hh = 0, int mm = 0, int ss = 0);

/// Contiguous schedule over `days` consecutive days from 2023-06-05, each
/// day split into 2..8 events drawn from the address pool.
std::vector<ScheduleEvent> clean_schedule(std::mt19937_64& rng, int days);
/// A clean schedule with random boundary shifts, drops and duplicates.
std::vector<ScheduleEvent> fuzz_schedule(std::mt19937_64& rng);

/// Validator-clean browsing entries within the given days.
std::vector<BrowsingEntry> clean_browsing(std::mt19937_64& rng, int days, int per_day);
/// Entries with night times, zero seconds, duplicates and out-of-range days.
std::vector<BrowsingEntry> fuzz_browsing(std::mt19937_64& rng);

std::vector<SocialPost> fuzz_posts(std::mt19937_64& rng, const std::vector<ScheduleEvent>& schedule);

/// Distinct ad counts from a per-ad persona map, counted with plain loops.
std::pair<int, int> overlap_oracle(const std::map<std::string, std::vector<std::string>>& personas_by_ad);

}  // namespace sbxtest
