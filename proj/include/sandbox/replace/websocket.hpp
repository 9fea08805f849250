#pragma once

#include <chrono>
#include <mutex>
#include <string>

#include "sandbox/replace/driver.hpp"

namespace sandbox {

struct WebSocketUrl {
  std::string host;
  int port = 80;
  std::string path = "/";
};

/// Parses "ws://host[:port][/path]". Secure sockets are not supported:
/// DevTools endpoints listen on loopback in plain text.
WebSocketUrl parse_websocket_url(std::string_view url);

/// Sec-WebSocket-Accept value for a handshake key.
std::string websocket_accept_key(std::string_view key);

/// Minimal RFC 6455 client carrying DevTools protocol messages. Events
/// arriving while a response is awaited are discarded.
class WebSocketDevToolsTransport : public DevToolsTransport {
 public:
  explicit WebSocketDevToolsTransport(std::string_view url,
                                      std::chrono::milliseconds timeout = std::chrono::seconds(30));
  ~WebSocketDevToolsTransport() override;
  WebSocketDevToolsTransport(const WebSocketDevToolsTransport&) = delete;
  WebSocketDevToolsTransport& operator=(const WebSocketDevToolsTransport&) = delete;

  bool connected() const override { return fd_ >= 0; }
  Json send(const std::string& method, const Json& params) override;

 private:
  void write_frame(int opcode, std::string_view payload);
  std::string read_message();
  void read_exact(char* out, std::size_t n);
  void close_socket();
  [[noreturn]] void lost(const std::string& why);

  int fd_ = -1;
  std::int64_t next_id_ = 1;
  std::mutex mutex_;
  std::string buffered_;  // bytes read past the handshake response
};

/// Resolves the page-level debugger URL from a DevTools HTTP endpoint
/// ("http://host:port") via /json/list. Throws DriverDisconnected.
std::string devtools_page_url(const std::string& http_endpoint);

}  // namespace sandbox
