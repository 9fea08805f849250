#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "sandbox/core/json.hpp"
#include "sandbox/core/error.hpp"

namespace sandbox {

struct CommandResult {
  bool ok = true;
  std::string detail;

  bool operator==(const CommandResult&) const = default;
};

/// Browser automation surface used during activation. Commands report
/// failure through CommandResult; a lost session throws DriverDisconnected.
class BrowserDriver {
 public:
  virtual ~BrowserDriver() = default;

  virtual bool connected() const = 0;
  virtual CommandResult navigate(const std::string& url) = 0;
  /// Locates an element by its aria-label on the current page.
  virtual CommandResult find_field(const std::string& label) = 0;
  virtual CommandResult set_field(const std::string& label, const std::string& value) = 0;
  virtual CommandResult set_geolocation_override(double latitude, double longitude, double accuracy) = 0;
  virtual CommandResult set_user_agent_override(const std::string& user_agent) = 0;
};

/// One dispatched driver command and its outcome.
struct TranscriptEntry {
  std::string command;
  Json args;
  CommandResult result;

  bool operator==(const TranscriptEntry&) const = default;
};

Json transcript_to_json(const std::vector<TranscriptEntry>& transcript);
std::vector<TranscriptEntry> transcript_from_json(const Json& json);

/// In-memory driver: acknowledges every command except fields whose label
/// is rejected (case-insensitive). Records what it was sent.
class ScriptedBrowserDriver : public BrowserDriver {
 public:
  ScriptedBrowserDriver() = default;
  explicit ScriptedBrowserDriver(std::set<std::string> rejected_labels);

  bool connected() const override { return connected_; }
  CommandResult navigate(const std::string& url) override;
  CommandResult find_field(const std::string& label) override;
  CommandResult set_field(const std::string& label, const std::string& value) override;
  CommandResult set_geolocation_override(double latitude, double longitude, double accuracy) override;
  CommandResult set_user_agent_override(const std::string& user_agent) override;

  /// Commands after the given count throw DriverDisconnected.
  void disconnect_after(std::size_t commands) { disconnect_after_ = commands; }
  void set_connected(bool connected) { connected_ = connected; }

  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  CommandResult record(std::string command, Json args, CommandResult result);

  std::set<std::string> rejected_;
  bool connected_ = true;
  std::size_t disconnect_after_ = static_cast<std::size_t>(-1);
  std::vector<TranscriptEntry> transcript_;
};

/// Wraps a driver and records every command it forwards.
class RecordingBrowserDriver : public BrowserDriver {
 public:
  explicit RecordingBrowserDriver(BrowserDriver& inner) : inner_(inner) {}

  bool connected() const override { return inner_.connected(); }
  CommandResult navigate(const std::string& url) override;
  CommandResult find_field(const std::string& label) override;
  CommandResult set_field(const std::string& label, const std::string& value) override;
  CommandResult set_geolocation_override(double latitude, double longitude, double accuracy) override;
  CommandResult set_user_agent_override(const std::string& user_agent) override;

  const std::vector<TranscriptEntry>& transcript() const { return transcript_; }

 private:
  CommandResult record(std::string command, Json args, CommandResult result);

  BrowserDriver& inner_;
  std::vector<TranscriptEntry> transcript_;
};

/// Serves a recorded transcript. Each command must match the next entry
/// (command and arguments); a mismatch throws InvariantViolated, running
/// past the end throws DriverDisconnected.
class ReplayBrowserDriver : public BrowserDriver {
 public:
  explicit ReplayBrowserDriver(std::vector<TranscriptEntry> transcript) : transcript_(std::move(transcript)) {}

  bool connected() const override { return true; }
  CommandResult navigate(const std::string& url) override;
  CommandResult find_field(const std::string& label) override;
  CommandResult set_field(const std::string& label, const std::string& value) override;
  CommandResult set_geolocation_override(double latitude, double longitude, double accuracy) override;
  CommandResult set_user_agent_override(const std::string& user_agent) override;

  std::size_t consumed() const { return next_; }
  bool exhausted() const { return next_ == transcript_.size(); }

 private:
  CommandResult replay(const std::string& command, const Json& args);

  std::vector<TranscriptEntry> transcript_;
  std::size_t next_ = 0;
};

/// Message channel of a DevTools remote-protocol session.
class DevToolsTransport {
 public:
  virtual ~DevToolsTransport() = default;
  virtual bool connected() const = 0;
  /// Sends {id, method, params} and returns the matching response object
  /// ({"result": ...} or {"error": ...}). Throws DriverDisconnected.
  virtual Json send(const std::string& method, const Json& params) = 0;
};

/// Driver speaking the DevTools protocol: Page.navigate,
/// Emulation.setGeolocationOverride, Emulation.setUserAgentOverride, and
/// Runtime.evaluate scripts walking aria-labels for field access.
class DevToolsBrowserDriver : public BrowserDriver {
 public:
  explicit DevToolsBrowserDriver(DevToolsTransport& transport) : transport_(transport) {}

  bool connected() const override { return transport_.connected(); }
  CommandResult navigate(const std::string& url) override;
  CommandResult find_field(const std::string& label) override;
  CommandResult set_field(const std::string& label, const std::string& value) override;
  CommandResult set_geolocation_override(double latitude, double longitude, double accuracy) override;
  CommandResult set_user_agent_override(const std::string& user_agent) override;

  /// Scripts sent through Runtime.evaluate, exposed for inspection.
  static std::string find_field_script(const std::string& label);
  static std::string set_field_script(const std::string& label, const std::string& value);

 private:
  CommandResult call(const std::string& method, const Json& params);
  CommandResult evaluate(const std::string& script);

  DevToolsTransport& transport_;
};

/// IP egress switcher used for the ConnectVpn step.
class VpnClient {
 public:
  virtual ~VpnClient() = default;
  virtual CommandResult connect(const std::string& server_id) = 0;
  virtual CommandResult disconnect() = 0;
};

/// Records connect/disconnect calls; optionally rejects given server ids.
class StubVpnClient : public VpnClient {
 public:
  StubVpnClient() = default;
  explicit StubVpnClient(std::set<std::string> rejected) : rejected_(std::move(rejected)) {}

  CommandResult connect(const std::string& server_id) override;
  CommandResult disconnect() override;

  const std::vector<std::string>& calls() const { return calls_; }
  const std::string& current() const { return current_; }

 private:
  std::set<std::string> rejected_;
  std::vector<std::string> calls_;
  std::string current_;
};

/// Runs an external command for connect/disconnect. "{server}" in the
/// connect argv is replaced by the server id, e.g. {"nordvpn", "connect", "{server}"}.
class CommandVpnClient : public VpnClient {
 public:
  CommandVpnClient(std::vector<std::string> connect_argv, std::vector<std::string> disconnect_argv)
      : connect_argv_(std::move(connect_argv)), disconnect_argv_(std::move(disconnect_argv)) {}

  CommandResult connect(const std::string& server_id) override;
  CommandResult disconnect() override;

 private:
  std::vector<std::string> connect_argv_;
  std::vector<std::string> disconnect_argv_;
};

/// Runs argv without a shell; returns ok when the exit status is zero.
CommandResult run_command(const std::vector<std::string>& argv);

}  // namespace sandbox
