#pragma once

#include <memory>
#include <string>
#include <thread>

#include "sandbox/service/service.hpp"

namespace httplib {
class Server;
}

namespace sandbox {

int http_status_for(ErrorCode code);

/// JSON error body: {"error": {"code": "...", "message": "..."}}.
Json error_body(ErrorCode code, std::string_view message);

/// Registers every persona, activation, observation and report route.
void register_routes(httplib::Server& server, PersonaService& service);

/// Owns an HTTP server bound to host:port and serving on a background
/// thread. Port 0 picks a free port.
class ApiServer {
 public:
  ApiServer(PersonaService& service, std::string host, int port);
  ~ApiServer();
  ApiServer(const ApiServer&) = delete;
  ApiServer& operator=(const ApiServer&) = delete;

  int port() const { return port_; }
  const std::string& host() const { return host_; }
  /// Blocks until stop() is called from another thread.
  void wait();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
  std::string host_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace sandbox
