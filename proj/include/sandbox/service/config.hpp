#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sandbox/service/service.hpp"

namespace sandbox {

enum class ProviderMode { Replay, Live, Record };

std::string_view to_string(ProviderMode mode);
std::optional<ProviderMode> parse_provider_mode(std::string_view name);

struct AppConfig {
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  std::filesystem::path store_path = "sandbox.db";
  ProviderMode provider_mode = ProviderMode::Replay;
  std::filesystem::path fixture_dir = "fixtures";
  std::filesystem::path vpn_servers;  // empty: <fixture_dir>/vpn_servers.json
  std::filesystem::path sandbox_root = "sandbox-profiles";
  std::string driver = "scripted";
  std::string templates = "v1";  // builtin version name or a directory
  std::vector<std::string> vpn_connect_command;  // empty: stub client
  std::vector<std::string> vpn_disconnect_command;
  std::size_t workers = 2;

  std::filesystem::path text_fixture_dir() const { return fixture_dir / "text"; }
  std::filesystem::path geocode_fixture() const { return fixture_dir / "geocode.json"; }
  std::filesystem::path vpn_server_list() const;
};

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

/// Reads the optional JSON config file, then applies SANDBOX_LISTEN,
/// SANDBOX_STORE, SANDBOX_PROVIDER_MODE, SANDBOX_FIXTURE_DIR,
/// SANDBOX_VPN_SERVERS, SANDBOX_ROOT, SANDBOX_DRIVER and SANDBOX_TEMPLATES.
/// Throws ParseFailed on malformed values.
AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env());

Json config_to_json(const AppConfig& config);

/// Builds a browser driver from an endpoint:
///   "scripted" or "scripted:reject=Label,Label"  in-memory driver
///   "replay:<transcript.json>"                   recorded transcript
///   "ws://..."                                   DevTools page socket
///   "http://host:port"                           DevTools HTTP endpoint, first page target
std::unique_ptr<BrowserDriver> make_driver(const std::string& endpoint);

/// Providers, clients and the service assembled from a config. Owns
/// everything the service borrows.
class Runtime {
 public:
  explicit Runtime(AppConfig config);
  ~Runtime();

  const AppConfig& config() const { return config_; }
  PersonaStore& store() { return *store_; }
  PersonaService& service() { return *service_; }
  TextProvider& provider() { return *provider_; }
  Geocoder& geocoder() { return *geocoder_; }

 private:
  AppConfig config_;
  std::unique_ptr<TextProvider> live_provider_;
  std::unique_ptr<TextProvider> retrying_provider_;
  std::unique_ptr<TextProvider> provider_;
  std::unique_ptr<Geocoder> live_geocoder_;
  std::unique_ptr<Geocoder> geocoder_;
  std::unique_ptr<VpnClient> vpn_;
  std::unique_ptr<PersonaStore> store_;
  std::unique_ptr<PersonaService> service_;
};

}  // namespace sandbox
