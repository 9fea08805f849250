#include "sandbox/replace/driver.hpp"

#include <spawn.h>
#include <sys/wait.h>

#include <cerrno>
#include <cstring>

#include "sandbox/core/text.hpp"

extern char** environ;

namespace sandbox {
namespace {

Json nav_args(const std::string& url) { return Json{{"url", url}}; }
Json label_args(const std::string& label) { return Json{{"label", label}}; }
Json field_args(const std::string& label, const std::string& value) { return Json{{"label", label}, {"value", value}}; }
Json geo_args(double lat, double lon, double accuracy) {
  return Json{{"latitude", lat}, {"longitude", lon}, {"accuracy", accuracy}};
}
Json ua_args(const std::string& ua) { return Json{{"user_agent", ua}}; }

}  // namespace

Json transcript_to_json(const std::vector<TranscriptEntry>& transcript) {
  Json out = Json::array();
  for (const auto& e : transcript) {
    out.push_back(Json{{"command", e.command}, {"args", e.args}, {"ok", e.result.ok}, {"detail", e.result.detail}});
  }
  return out;
}

std::vector<TranscriptEntry> transcript_from_json(const Json& json) {
  std::vector<TranscriptEntry> out;
  try {
    for (const auto& e : json) {
      out.push_back({e.at("command").get<std::string>(), e.at("args"),
                     {e.at("ok").get<bool>(), e.value("detail", std::string())}});
    }
  } catch (const Json::exception& ex) {
    throw Error(ErrorCode::ParseFailed, std::string("driver transcript: ") + ex.what());
  }
  return out;
}

ScriptedBrowserDriver::ScriptedBrowserDriver(std::set<std::string> rejected_labels) {
  for (const auto& l : rejected_labels) rejected_.insert(to_lower(l));
}

CommandResult ScriptedBrowserDriver::record(std::string command, Json args, CommandResult result) {
  if (!connected_ || transcript_.size() >= disconnect_after_) {
    connected_ = false;
    throw Error(ErrorCode::DriverDisconnected, "browser session closed");
  }
  transcript_.push_back({std::move(command), std::move(args), result});
  return result;
}

CommandResult ScriptedBrowserDriver::navigate(const std::string& url) { return record("navigate", nav_args(url), {}); }

CommandResult ScriptedBrowserDriver::find_field(const std::string& label) {
  CommandResult r;
  if (rejected_.contains(to_lower(label))) r = {false, "no element with aria-label \"" + label + "\""};
  return record("find_field", label_args(label), r);
}

CommandResult ScriptedBrowserDriver::set_field(const std::string& label, const std::string& value) {
  CommandResult r;
  if (rejected_.contains(to_lower(label))) r = {false, "no element with aria-label \"" + label + "\""};
  return record("set_field", field_args(label, value), r);
}

CommandResult ScriptedBrowserDriver::set_geolocation_override(double latitude, double longitude, double accuracy) {
  return record("set_geolocation_override", geo_args(latitude, longitude, accuracy), {});
}

CommandResult ScriptedBrowserDriver::set_user_agent_override(const std::string& user_agent) {
  return record("set_user_agent_override", ua_args(user_agent), {});
}

CommandResult RecordingBrowserDriver::record(std::string command, Json args, CommandResult result) {
  transcript_.push_back({std::move(command), std::move(args), result});
  return result;
}

CommandResult RecordingBrowserDriver::navigate(const std::string& url) {
  return record("navigate", nav_args(url), inner_.navigate(url));
}

CommandResult RecordingBrowserDriver::find_field(const std::string& label) {
  return record("find_field", label_args(label), inner_.find_field(label));
}

CommandResult RecordingBrowserDriver::set_field(const std::string& label, const std::string& value) {
  return record("set_field", field_args(label, value), inner_.set_field(label, value));
}

CommandResult RecordingBrowserDriver::set_geolocation_override(double latitude, double longitude, double accuracy) {
  return record("set_geolocation_override", geo_args(latitude, longitude, accuracy),
                inner_.set_geolocation_override(latitude, longitude, accuracy));
}

CommandResult RecordingBrowserDriver::set_user_agent_override(const std::string& user_agent) {
  return record("set_user_agent_override", ua_args(user_agent), inner_.set_user_agent_override(user_agent));
}

CommandResult ReplayBrowserDriver::replay(const std::string& command, const Json& args) {
  if (next_ >= transcript_.size()) {
    throw Error(ErrorCode::DriverDisconnected, "transcript ended before " + command);
  }
  const auto& expected = transcript_[next_];
  if (expected.command != command || expected.args != args) {
    throw Error(ErrorCode::InvariantViolated, "transcript entry " + std::to_string(next_) + " is " +
                                                  expected.command + " " + expected.args.dump() + ", got " + command +
                                                  " " + args.dump());
  }
  ++next_;
  return expected.result;
}

CommandResult ReplayBrowserDriver::navigate(const std::string& url) { return replay("navigate", nav_args(url)); }
CommandResult ReplayBrowserDriver::find_field(const std::string& label) {
  return replay("find_field", label_args(label));
}
CommandResult ReplayBrowserDriver::set_field(const std::string& label, const std::string& value) {
  return replay("set_field", field_args(label, value));
}
CommandResult ReplayBrowserDriver::set_geolocation_override(double latitude, double longitude, double accuracy) {
  return replay("set_geolocation_override", geo_args(latitude, longitude, accuracy));
}
CommandResult ReplayBrowserDriver::set_user_agent_override(const std::string& user_agent) {
  return replay("set_user_agent_override", ua_args(user_agent));
}

std::string DevToolsBrowserDriver::find_field_script(const std::string& label) {
  return "(() => { const want = " + Json(label).dump() +
         ".toLowerCase();"
         " return [...document.querySelectorAll('[aria-label]')]"
         ".some(e => e.getAttribute('aria-label').trim().toLowerCase() === want); })()";
}

std::string DevToolsBrowserDriver::set_field_script(const std::string& label, const std::string& value) {
  return "(async () => {"
         " const norm = s => (s || '').trim().toLowerCase();"
         " const want = norm(" + Json(label).dump() + "), value = " + Json(value).dump() + ";"
         " const el = [...document.querySelectorAll('[aria-label]')]"
         ".find(e => norm(e.getAttribute('aria-label')) === want);"
         " if (!el) return false;"
         " if ('value' in el && (el.tagName === 'INPUT' || el.tagName === 'SELECT' || el.tagName === 'TEXTAREA')) {"
         " el.value = value; el.dispatchEvent(new Event('input', {bubbles: true}));"
         " el.dispatchEvent(new Event('change', {bubbles: true})); return true; }"
         " el.click(); await new Promise(r => setTimeout(r, 300));"
         " const option = [...document.querySelectorAll('[role=option],[role=radio],[role=menuitemradio],li')]"
         ".find(o => norm(o.getAttribute('aria-label') || o.textContent) === norm(value));"
         " if (!option) return false; option.click(); return true; })()";
}

CommandResult DevToolsBrowserDriver::call(const std::string& method, const Json& params) {
  Json response = transport_.send(method, params);
  if (response.contains("error")) {
    return {false, method + ": " + response["error"].value("message", response["error"].dump())};
  }
  return {};
}

CommandResult DevToolsBrowserDriver::evaluate(const std::string& script) {
  Json response = transport_.send("Runtime.evaluate",
                                  Json{{"expression", script}, {"returnByValue", true}, {"awaitPromise", true}});
  if (response.contains("error")) return {false, response["error"].value("message", std::string("evaluate failed"))};
  const auto& result = response.value("result", Json::object());
  if (result.contains("exceptionDetails")) {
    return {false, result["exceptionDetails"].value("text", std::string("script exception"))};
  }
  bool ok = result.contains("result") && result["result"].value("value", Json(false)) == Json(true);
  return ok ? CommandResult{} : CommandResult{false, "script returned false"};
}

CommandResult DevToolsBrowserDriver::navigate(const std::string& url) {
  return call("Page.navigate", Json{{"url", url}});
}

CommandResult DevToolsBrowserDriver::find_field(const std::string& label) {
  auto r = evaluate(find_field_script(label));
  if (!r.ok) r.detail = "no element with aria-label \"" + label + "\"";
  return r;
}

CommandResult DevToolsBrowserDriver::set_field(const std::string& label, const std::string& value) {
  auto r = evaluate(set_field_script(label, value));
  if (!r.ok) r.detail = "could not set \"" + label + "\" to \"" + value + "\": " + r.detail;
  return r;
}

CommandResult DevToolsBrowserDriver::set_geolocation_override(double latitude, double longitude, double accuracy) {
  return call("Emulation.setGeolocationOverride",
              Json{{"latitude", latitude}, {"longitude", longitude}, {"accuracy", accuracy}});
}

CommandResult DevToolsBrowserDriver::set_user_agent_override(const std::string& user_agent) {
  return call("Emulation.setUserAgentOverride", Json{{"userAgent", user_agent}});
}

CommandResult StubVpnClient::connect(const std::string& server_id) {
  calls_.push_back("connect " + server_id);
  if (rejected_.contains(server_id)) return {false, "server " + server_id + " refused the connection"};
  current_ = server_id;
  return {};
}

CommandResult StubVpnClient::disconnect() {
  calls_.push_back("disconnect");
  current_.clear();
  return {};
}

CommandResult run_command(const std::vector<std::string>& argv) {
  if (argv.empty()) return {false, "empty command"};
  std::vector<char*> args;
  for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);
  pid_t pid = 0;
  int rc = posix_spawnp(&pid, args[0], nullptr, nullptr, args.data(), environ);
  if (rc != 0) return {false, argv[0] + ": " + std::strerror(rc)};
  int status = 0;
  while (waitpid(pid, &status, 0) < 0) {
    if (errno != EINTR) return {false, argv[0] + ": " + std::strerror(errno)};
  }
  if (WIFEXITED(status) && WEXITSTATUS(status) == 0) return {};
  if (WIFEXITED(status)) return {false, argv[0] + " exited with status " + std::to_string(WEXITSTATUS(status))};
  return {false, argv[0] + " terminated by a signal"};
}

CommandResult CommandVpnClient::connect(const std::string& server_id) {
  auto argv = connect_argv_;
  for (auto& a : argv) {
    for (auto pos = a.find("{server}"); pos != std::string::npos; pos = a.find("{server}", pos + server_id.size())) {
      a.replace(pos, 8, server_id);
    }
  }
  return run_command(argv);
}

CommandResult CommandVpnClient::disconnect() { return run_command(disconnect_argv_); }

}  // namespace sandbox
