#include "sandbox/replace/vpn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

namespace sandbox {
namespace {

double radians(double degrees) { return degrees * std::numbers::pi / 180.0; }

}  // namespace

double haversine_km(GeoPoint a, GeoPoint b) {
  double dlat = radians(b.latitude - a.latitude);
  double dlon = radians(b.longitude - a.longitude);
  double s = std::sin(dlat / 2) * std::sin(dlat / 2) +
             std::cos(radians(a.latitude)) * std::cos(radians(b.latitude)) * std::sin(dlon / 2) * std::sin(dlon / 2);
  s = std::clamp(s, 0.0, 1.0);
  return 2.0 * kEarthRadiusKm * std::asin(std::sqrt(s));
}

const VpnServer& select_vpn_server(GeoPoint point, std::span<const VpnServer> servers) {
  if (servers.empty()) throw Error(ErrorCode::EmptyServerList, "no VPN servers to choose from");
  std::vector<double> distance;
  distance.reserve(servers.size());
  for (const auto& s : servers) distance.push_back(haversine_km(point, s.location));
  double nearest = *std::min_element(distance.begin(), distance.end());

  const VpnServer* best = nullptr;
  for (std::size_t i = 0; i < servers.size(); ++i) {
    if (distance[i] > nearest + kDistanceTieKm) continue;
    const auto& s = servers[i];
    if (!best || s.load_percent < best->load_percent ||
        (s.load_percent == best->load_percent && s.id < best->id)) {
      best = &s;
    }
  }
  return *best;
}

std::vector<VpnServer> vpn_servers_from_json(const Json& json) {
  if (!json.is_array()) throw Error(ErrorCode::ParseFailed, "VPN server list must be an array");
  std::vector<VpnServer> out;
  for (std::size_t i = 0; i < json.size(); ++i) {
    const auto& row = json[i];
    std::string where = "VPN server " + std::to_string(i);
    try {
      VpnServer s;
      s.id = row.at("id").get<std::string>();
      s.location = {row.at("lat").get<double>(), row.at("lon").get<double>()};
      s.load_percent = row.at("load").get<int>();
      if (s.id.empty()) throw Error(ErrorCode::ParseFailed, where + ": empty id");
      if (!s.location.valid()) throw Error(ErrorCode::ParseFailed, where + ": coordinates out of range");
      if (s.load_percent < 0 || s.load_percent > 100) throw Error(ErrorCode::ParseFailed, where + ": load not in 0..100");
      out.push_back(std::move(s));
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseFailed, where + ": " + e.what());
    }
  }
  return out;
}

std::vector<VpnServer> load_vpn_servers(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read VPN server list " + path.string());
  Json json;
  try {
    json = Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseFailed, "VPN server list " + path.string() + ": " + e.what());
  }
  return vpn_servers_from_json(json);
}

}  // namespace sandbox
