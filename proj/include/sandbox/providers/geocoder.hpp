#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "sandbox/core/types.hpp"
#include "sandbox/providers/retry.hpp"

namespace sandbox {

class Geocoder {
 public:
  virtual ~Geocoder() = default;

  /// Coordinates of the first-ranked match. Throws NotFound when nothing
  /// matches; callers surface that rather than guessing.
  virtual GeoPoint geocode(std::string_view address) = 0;
};

/// Lowercased, whitespace-collapsed, trailing punctuation removed.
std::string normalize_address_key(std::string_view address);

/// Serves a bundled JSON table {"address": [lat, lon], ...}.
class FixtureGeocoder : public Geocoder {
 public:
  explicit FixtureGeocoder(const std::filesystem::path& table);
  explicit FixtureGeocoder(std::map<std::string, GeoPoint> table);

  GeoPoint geocode(std::string_view address) override;

 private:
  std::map<std::string, GeoPoint> table_;
};

/// OpenStreetMap Nominatim search client.
class NominatimGeocoder : public Geocoder {
 public:
  struct Options {
    std::string base_url = "https://nominatim.openstreetmap.org";
    std::string user_agent = "persona-sandbox/0.1";
    int timeout_seconds = 30;
  };

  explicit NominatimGeocoder(Options options) : options_(std::move(options)) {}
  /// Options from SANDBOX_GEOCODER_URL and SANDBOX_GEOCODER_USER_AGENT.
  static Options options_from_env();

  GeoPoint geocode(std::string_view address) override;

 private:
  Options options_;
};

class RetryingGeocoder : public Geocoder {
 public:
  RetryingGeocoder(Geocoder& inner, RetryPolicy policy = {}) : inner_(inner), policy_(std::move(policy)) {}

  GeoPoint geocode(std::string_view address) override {
    return with_retries(policy_, [&] { return inner_.geocode(address); });
  }

 private:
  Geocoder& inner_;
  RetryPolicy policy_;
};

}  // namespace sandbox
