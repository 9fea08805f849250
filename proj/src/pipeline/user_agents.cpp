#include "sandbox/pipeline/user_agents.hpp"

#include "sandbox/core/text.hpp"

namespace sandbox {
namespace {

enum class Platform { Windows, Mac, IPhone, IPad, Android, Linux, ChromeOS };

Platform platform_of(std::string_view device) {
  std::string d = to_lower(device);
  auto has = [&d](std::string_view k) { return d.find(k) != std::string::npos; };
  if (has("iphone")) return Platform::IPhone;
  if (has("ipad")) return Platform::IPad;
  if (has("android") || has("pixel") || has("galaxy") || has("samsung") || has("oneplus") || has("motorola"))
    return Platform::Android;
  if (has("chromebook")) return Platform::ChromeOS;
  if (has("mac") || has("imac")) return Platform::Mac;
  if (has("linux") || has("ubuntu")) return Platform::Linux;
  return Platform::Windows;
}

std::string_view platform_token(Platform p) {
  switch (p) {
    case Platform::Windows: return "Windows NT 10.0; Win64; x64";
    case Platform::Mac: return "Macintosh; Intel Mac OS X 10_15_7";
    case Platform::IPhone: return "iPhone; CPU iPhone OS 16_5 like Mac OS X";
    case Platform::IPad: return "iPad; CPU OS 16_5 like Mac OS X";
    case Platform::Android: return "Linux; Android 13; K";
    case Platform::Linux: return "X11; Linux x86_64";
    case Platform::ChromeOS: return "X11; CrOS x86_64 15474.84.0";
  }
  return "";
}

bool mobile(Platform p) { return p == Platform::IPhone || p == Platform::IPad || p == Platform::Android; }
bool apple_mobile(Platform p) { return p == Platform::IPhone || p == Platform::IPad; }

std::string chromium_ua(Platform p, std::string_view suffix) {
  std::string ua = "Mozilla/5.0 (" + std::string(platform_token(p)) +
                   ") AppleWebKit/537.36 (KHTML, like Gecko) Chrome/114.0.0.0 ";
  ua += mobile(p) ? "Mobile Safari/537.36" : "Safari/537.36";
  if (!suffix.empty()) {
    ua += ' ';
    ua += suffix;
  }
  return ua;
}

}  // namespace

std::optional<std::string> compose_user_agent(std::string_view browser, std::string_view device) {
  const std::string b = to_lower(browser);
  const Platform p = platform_of(device);
  const std::string platform(platform_token(p));
  auto has = [&b](std::string_view k) { return b.find(k) != std::string::npos; };

  if (has("edge")) {
    return chromium_ua(p, mobile(p) ? "EdgA/114.0.1823.74" : "Edg/114.0.1823.51");
  }
  if (has("samsung")) {
    return "Mozilla/5.0 (Linux; Android 13; SAMSUNG SM-S911B) AppleWebKit/537.36 (KHTML, like Gecko) "
           "SamsungBrowser/21.0 Chrome/110.0.5481.154 Mobile Safari/537.36";
  }
  if (has("opera")) return chromium_ua(p, "OPR/99.0.0.0");
  if (has("firefox")) {
    if (p == Platform::Android) return "Mozilla/5.0 (Android 13; Mobile; rv:114.0) Gecko/114.0 Firefox/114.0";
    if (apple_mobile(p)) {
      return "Mozilla/5.0 (" + platform +
             ") AppleWebKit/605.1.15 (KHTML, like Gecko) FxiOS/114.0 Mobile/15E148 Safari/605.1.15";
    }
    return "Mozilla/5.0 (" + platform + "; rv:114.0) Gecko/20100101 Firefox/114.0";
  }
  if (has("chrome") || has("chromium") || has("brave")) {
    if (apple_mobile(p)) {
      return "Mozilla/5.0 (" + platform +
             ") AppleWebKit/605.1.15 (KHTML, like Gecko) CriOS/114.0.5735.124 Mobile/15E148 Safari/604.1";
    }
    return chromium_ua(p, "");
  }
  if (has("safari")) {
    if (apple_mobile(p)) {
      return "Mozilla/5.0 (" + platform +
             ") AppleWebKit/605.1.15 (KHTML, like Gecko) Version/16.5 Mobile/15E148 Safari/604.1";
    }
    return "Mozilla/5.0 (Macintosh; Intel Mac OS X 10_15_7) AppleWebKit/605.1.15 (KHTML, like Gecko) "
           "Version/16.5 Safari/605.1.15";
  }
  return std::nullopt;
}

}  // namespace sandbox
