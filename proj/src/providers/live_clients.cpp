#include <cstdlib>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"
#include "sandbox/providers/geocoder.hpp"
#include "sandbox/providers/text_provider.hpp"

namespace sandbox {
namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* value = std::getenv(name);
  return value && *value ? std::string(value) : std::move(fallback);
}

[[noreturn]] void unavailable(const std::string& what) {
  throw Error(ErrorCode::ProviderUnavailable, what);
}

}  // namespace

OpenAiTextProvider::Options OpenAiTextProvider::options_from_env() {
  Options options;
  options.api_key = env_or("OPENAI_API_KEY", "");
  options.base_url = env_or("SANDBOX_OPENAI_BASE_URL", options.base_url);
  options.model = env_or("SANDBOX_OPENAI_MODEL", options.model);
  return options;
}

OpenAiTextProvider::OpenAiTextProvider(Options options) : options_(std::move(options)) {}

std::string OpenAiTextProvider::generate_text(const TextGenerationRequest& request) {
  check_request(request);
  if (options_.api_key.empty()) unavailable("OPENAI_API_KEY is not set");

  nlohmann::json body = {
      {"model", options_.model},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.prompt}}})},
      {"max_tokens", request.max_tokens},
      {"temperature", request.temperature},
  };
  httplib::Client client(options_.base_url);
  client.set_read_timeout(options_.timeout_seconds, 0);
  client.set_bearer_token_auth(options_.api_key);
  auto response = client.Post("/v1/chat/completions", body.dump(), "application/json");
  if (!response) unavailable("text provider transport error: " + httplib::to_string(response.error()));
  if (response->status != 200) {
    unavailable("text provider returned HTTP " + std::to_string(response->status));
  }
  auto json = nlohmann::json::parse(response->body, nullptr, false);
  if (json.is_discarded()) unavailable("text provider returned malformed JSON");
  try {
    return json.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    unavailable("text provider response has no completion");
  }
}

NominatimGeocoder::Options NominatimGeocoder::options_from_env() {
  Options options;
  options.base_url = env_or("SANDBOX_GEOCODER_URL", options.base_url);
  options.user_agent = env_or("SANDBOX_GEOCODER_USER_AGENT", options.user_agent);
  return options;
}

GeoPoint NominatimGeocoder::geocode(std::string_view address) {
  require(!trim(address).empty(), "address must not be empty");
  httplib::Client client(options_.base_url);
  client.set_read_timeout(options_.timeout_seconds, 0);
  httplib::Params params{{"q", std::string(address)}, {"format", "jsonv2"}, {"limit", "1"}};
  httplib::Headers headers{{"User-Agent", options_.user_agent}};
  auto response = client.Get("/search", params, headers);
  if (!response) unavailable("geocoder transport error: " + httplib::to_string(response.error()));
  if (response->status != 200) unavailable("geocoder returned HTTP " + std::to_string(response->status));
  auto json = nlohmann::json::parse(response->body, nullptr, false);
  if (json.is_discarded() || !json.is_array()) unavailable("geocoder returned malformed JSON");
  if (json.empty()) throw Error(ErrorCode::NotFound, "no geocoding match for \"" + std::string(address) + "\"");
  const auto& first = json.front();
  try {
    // Nominatim encodes coordinates as decimal strings.
    return GeoPoint{std::stod(first.at("lat").get<std::string>()),
                    std::stod(first.at("lon").get<std::string>())};
  } catch (const std::exception&) {
    unavailable("geocoder match has no coordinates");
  }
}

}  // namespace sandbox
