#include "sandbox/service/config.hpp"

#include <cstdlib>
#include <fstream>

#include "sandbox/core/text.hpp"
#include "sandbox/replace/websocket.hpp"

namespace sandbox {
namespace {

// A DevTools driver that owns its transport.
class OwningDevToolsDriver : public BrowserDriver {
 public:
  explicit OwningDevToolsDriver(const std::string& url)
      : transport_(std::make_unique<WebSocketDevToolsTransport>(url)), driver_(*transport_) {}

  bool connected() const override { return driver_.connected(); }
  CommandResult navigate(const std::string& url) override { return driver_.navigate(url); }
  CommandResult find_field(const std::string& label) override { return driver_.find_field(label); }
  CommandResult set_field(const std::string& label, const std::string& value) override {
    return driver_.set_field(label, value);
  }
  CommandResult set_geolocation_override(double lat, double lon, double accuracy) override {
    return driver_.set_geolocation_override(lat, lon, accuracy);
  }
  CommandResult set_user_agent_override(const std::string& ua) override { return driver_.set_user_agent_override(ua); }

 private:
  std::unique_ptr<WebSocketDevToolsTransport> transport_;
  DevToolsBrowserDriver driver_;
};

void apply_listen(AppConfig& c, const std::string& value) {
  auto colon = value.rfind(':');
  if (colon == std::string::npos) throw Error(ErrorCode::ParseFailed, "listen must be host:port, got " + value);
  c.listen_host = value.substr(0, colon);
  try {
    c.listen_port = std::stoi(value.substr(colon + 1));
  } catch (const std::exception&) {
    throw Error(ErrorCode::ParseFailed, "bad listen port in " + value);
  }
  if (c.listen_port < 0 || c.listen_port > 65535) throw Error(ErrorCode::ParseFailed, "listen port out of range");
}

void apply_mode(AppConfig& c, const std::string& value) {
  auto mode = parse_provider_mode(value);
  if (!mode) throw Error(ErrorCode::ParseFailed, "provider mode must be replay, live or record, got " + value);
  c.provider_mode = *mode;
}

std::vector<std::string> split_commas(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto part = trim(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (!part.empty()) out.emplace_back(part);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view to_string(ProviderMode mode) {
  switch (mode) {
    case ProviderMode::Replay: return "replay";
    case ProviderMode::Live: return "live";
    case ProviderMode::Record: return "record";
  }
  return "replay";
}

std::optional<ProviderMode> parse_provider_mode(std::string_view name) {
  for (auto m : {ProviderMode::Replay, ProviderMode::Live, ProviderMode::Record}) {
    if (to_string(m) == name) return m;
  }
  return std::nullopt;
}

std::filesystem::path AppConfig::vpn_server_list() const {
  return vpn_servers.empty() ? fixture_dir / "vpn_servers.json" : vpn_servers;
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (!v || !*v) return std::nullopt;
    return std::string(v);
  };
}

AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
  AppConfig c;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read config " + file->string());
    Json j;
    try {
      j = Json::parse(in);
      if (j.contains("listen")) apply_listen(c, j.at("listen").get<std::string>());
      if (j.contains("store")) c.store_path = j.at("store").get<std::string>();
      if (j.contains("provider_mode")) apply_mode(c, j.at("provider_mode").get<std::string>());
      if (j.contains("fixture_dir")) c.fixture_dir = j.at("fixture_dir").get<std::string>();
      if (j.contains("vpn_servers")) c.vpn_servers = j.at("vpn_servers").get<std::string>();
      if (j.contains("sandbox_root")) c.sandbox_root = j.at("sandbox_root").get<std::string>();
      if (j.contains("driver")) c.driver = j.at("driver").get<std::string>();
      if (j.contains("templates")) c.templates = j.at("templates").get<std::string>();
      if (j.contains("vpn_connect_command")) c.vpn_connect_command = j.at("vpn_connect_command").get<std::vector<std::string>>();
      if (j.contains("vpn_disconnect_command")) {
        c.vpn_disconnect_command = j.at("vpn_disconnect_command").get<std::vector<std::string>>();
      }
      if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    } catch (const Json::exception& e) {
      throw Error(ErrorCode::ParseFailed, "config " + file->string() + ": " + e.what());
    }
    // Relative paths in a config file are relative to the file.
    auto base = file->parent_path();
    for (auto* p : {&c.store_path, &c.fixture_dir, &c.vpn_servers, &c.sandbox_root}) {
      if (!p->empty() && p->is_relative() && *p != ":memory:") *p = base / *p;
    }
  }
  if (auto v = env("SANDBOX_LISTEN")) apply_listen(c, *v);
  if (auto v = env("SANDBOX_STORE")) c.store_path = *v;
  if (auto v = env("SANDBOX_PROVIDER_MODE")) apply_mode(c, *v);
  if (auto v = env("SANDBOX_FIXTURE_DIR")) c.fixture_dir = *v;
  if (auto v = env("SANDBOX_VPN_SERVERS")) c.vpn_servers = *v;
  if (auto v = env("SANDBOX_ROOT")) c.sandbox_root = *v;
  if (auto v = env("SANDBOX_DRIVER")) c.driver = *v;
  if (auto v = env("SANDBOX_TEMPLATES")) c.templates = *v;
  return c;
}

Json config_to_json(const AppConfig& c) {
  return Json{{"listen", c.listen_host + ":" + std::to_string(c.listen_port)},
              {"store", c.store_path.string()},
              {"provider_mode", std::string(to_string(c.provider_mode))},
              {"fixture_dir", c.fixture_dir.string()},
              {"vpn_servers", c.vpn_server_list().string()},
              {"sandbox_root", c.sandbox_root.string()},
              {"driver", c.driver},
              {"templates", c.templates},
              {"vpn_connect_command", c.vpn_connect_command},
              {"vpn_disconnect_command", c.vpn_disconnect_command},
              {"workers", c.workers}};
}

std::unique_ptr<BrowserDriver> make_driver(const std::string& endpoint) {
  if (endpoint == "scripted") return std::make_unique<ScriptedBrowserDriver>();
  if (endpoint.rfind("scripted:reject=", 0) == 0) {
    auto labels = split_commas(std::string_view(endpoint).substr(16));
    return std::make_unique<ScriptedBrowserDriver>(std::set<std::string>(labels.begin(), labels.end()));
  }
  if (endpoint.rfind("replay:", 0) == 0) {
    std::filesystem::path path = endpoint.substr(7);
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot read driver transcript " + path.string());
    Json j = Json::parse(in, nullptr, false);
    if (j.is_discarded()) throw Error(ErrorCode::ParseFailed, "driver transcript is not JSON: " + path.string());
    return std::make_unique<ReplayBrowserDriver>(transcript_from_json(j));
  }
  if (endpoint.rfind("ws://", 0) == 0) return std::make_unique<OwningDevToolsDriver>(endpoint);
  if (endpoint.rfind("http://", 0) == 0) return std::make_unique<OwningDevToolsDriver>(devtools_page_url(endpoint));
  throw Error(ErrorCode::PreconditionFailed, "unknown driver endpoint \"" + endpoint + "\"");
}

Runtime::Runtime(AppConfig config) : config_(std::move(config)) {
  switch (config_.provider_mode) {
    case ProviderMode::Replay:
      provider_ = std::make_unique<ReplayTextProvider>(config_.text_fixture_dir());
      geocoder_ = std::make_unique<FixtureGeocoder>(config_.geocode_fixture());
      break;
    case ProviderMode::Live:
    case ProviderMode::Record: {
      live_provider_ = std::make_unique<OpenAiTextProvider>(OpenAiTextProvider::options_from_env());
      if (config_.provider_mode == ProviderMode::Record) {
        retrying_provider_ = std::make_unique<RetryingTextProvider>(*live_provider_);
        provider_ = std::make_unique<RecordingTextProvider>(*retrying_provider_, config_.text_fixture_dir());
      } else {
        provider_ = std::make_unique<RetryingTextProvider>(*live_provider_);
      }
      live_geocoder_ = std::make_unique<NominatimGeocoder>(NominatimGeocoder::options_from_env());
      geocoder_ = std::make_unique<RetryingGeocoder>(*live_geocoder_);
      break;
    }
  }
  if (config_.vpn_connect_command.empty()) {
    vpn_ = std::make_unique<StubVpnClient>();
  } else {
    vpn_ = std::make_unique<CommandVpnClient>(config_.vpn_connect_command, config_.vpn_disconnect_command);
  }

  ServiceDeps deps;
  deps.provider = provider_.get();
  deps.geocoder = geocoder_.get();
  deps.templates = std::filesystem::is_directory(config_.templates)
                       ? TemplateSet::load(config_.templates, std::filesystem::path(config_.templates).filename())
                       : TemplateSet::builtin(config_.templates);
  if (std::filesystem::exists(config_.vpn_server_list())) deps.vpn_servers = load_vpn_servers(config_.vpn_server_list());
  deps.driver_factory = make_driver;
  deps.vpn = vpn_.get();
  deps.default_driver = config_.driver;
  deps.sandbox_root = config_.sandbox_root;
  deps.workers = config_.workers;
  store_ = std::make_unique<PersonaStore>(config_.store_path);
  service_ = std::make_unique<PersonaService>(*store_, std::move(deps));
}

Runtime::~Runtime() = default;

}  // namespace sandbox
