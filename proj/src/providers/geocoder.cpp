#include "sandbox/providers/geocoder.hpp"

#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"

namespace sandbox {

std::string normalize_address_key(std::string_view address) {
  std::string out;
  bool space = false;
  for (char c : trim(address)) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  while (!out.empty() && (out.back() == '.' || out.back() == ',')) out.pop_back();
  return out;
}

FixtureGeocoder::FixtureGeocoder(const std::filesystem::path& table) {
  std::ifstream in(table);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read geocode fixture " + table.string());
  auto json = nlohmann::json::parse(in, nullptr, false);
  if (json.is_discarded() || !json.is_object()) {
    throw Error(ErrorCode::IoFailure, "malformed geocode fixture " + table.string());
  }
  for (const auto& [address, value] : json.items()) {
    GeoPoint point;
    if (value.is_array() && value.size() == 2) {
      point = {value[0].get<double>(), value[1].get<double>()};
    } else {
      point = {value.at("lat").get<double>(), value.at("lon").get<double>()};
    }
    table_[normalize_address_key(address)] = point;
  }
}

FixtureGeocoder::FixtureGeocoder(std::map<std::string, GeoPoint> table) {
  for (auto& [address, point] : table) table_[normalize_address_key(address)] = point;
}

GeoPoint FixtureGeocoder::geocode(std::string_view address) {
  require(!trim(address).empty(), "address must not be empty");
  auto it = table_.find(normalize_address_key(address));
  if (it == table_.end()) {
    throw Error(ErrorCode::NotFound, "no geocode fixture for \"" + std::string(address) + "\"");
  }
  return it->second;
}

}  // namespace sandbox
