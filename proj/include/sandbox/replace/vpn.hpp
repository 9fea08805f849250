#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sandbox/core/json.hpp"
#include "sandbox/core/error.hpp"
#include "sandbox/core/types.hpp"

namespace sandbox {

struct VpnServer {
  std::string id;
  GeoPoint location;
  int load_percent = 0;

  bool operator==(const VpnServer&) const = default;
};

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kDistanceTieKm = 1.0;

double haversine_km(GeoPoint a, GeoPoint b);

/// Nearest server, where every server within kDistanceTieKm of the nearest
/// counts as equally near; among those the lowest load wins, then the
/// smallest id. Throws EmptyServerList.
const VpnServer& select_vpn_server(GeoPoint point, std::span<const VpnServer> servers);

/// [{"id", "lat", "lon", "load"}, ...]; throws ParseFailed on bad rows.
std::vector<VpnServer> vpn_servers_from_json(const Json& json);
std::vector<VpnServer> load_vpn_servers(const std::filesystem::path& path);

}  // namespace sandbox
