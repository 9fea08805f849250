#include "sandbox/service/http_api.hpp"

#include <httplib.h>
#include <spdlog/spdlog.h>

#include "sandbox/core/persona_json.hpp"

namespace sandbox {
namespace {

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

Json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return Json::object();
  try {
    return Json::parse(req.body);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::ParseFailed, std::string("request body is not JSON: ") + e.what());
  }
}

Json violation_json(const Violation& v) {
  return Json{{"code", std::string(to_string(v.code))},
              {"severity", std::string(to_string(v.severity))},
              {"subject", v.subject},
              {"message", v.message}};
}

// Wraps a handler so library errors become JSON error responses.
template <typename Handler>
auto guarded(Handler handler) {
  return [handler](const httplib::Request& req, httplib::Response& res) {
    try {
      handler(req, res);
    } catch (const StageError& e) {
      Json body = error_body(e.code(), e.what());
      body["error"]["report"] = stage_report_to_json(e.report());
      send_json(res, http_status_for(e.code()), body);
    } catch (const Error& e) {
      send_json(res, http_status_for(e.code()), error_body(e.code(), e.what()));
    } catch (const std::exception& e) {
      spdlog::error("{} {}: {}", req.method, req.path, e.what());
      send_json(res, 500, Json{{"error", {{"code", "Internal"}, {"message", e.what()}}}});
    }
  };
}

}  // namespace

int http_status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::PreconditionFailed:
    case ErrorCode::ParseFailed:
    case ErrorCode::EmptyInput:
    case ErrorCode::OutOfRange:
      return 400;
    case ErrorCode::NotFound:
      return 404;
    case ErrorCode::ActiveLocked:
    case ErrorCode::AlreadyActive:
    case ErrorCode::StageOrderViolated:
      return 409;
    case ErrorCode::InvariantViolated:
    case ErrorCode::ValidationFailed:
    case ErrorCode::UnmappableValue:
    case ErrorCode::GenerationFailed:
    case ErrorCode::EmptyServerList:
      return 422;
    case ErrorCode::ProviderUnavailable:
    case ErrorCode::FixtureMissing:
    case ErrorCode::DriverDisconnected:
      return 502;
    case ErrorCode::IoFailure:
      return 500;
  }
  return 500;
}

Json error_body(ErrorCode code, std::string_view message) {
  return Json{{"error", {{"code", std::string(to_string(code))}, {"message", std::string(message)}}}};
}

void register_routes(httplib::Server& server, PersonaService& service) {
  server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                              {"Access-Control-Allow-Headers", "Content-Type"},
                              {"Access-Control-Allow-Methods", "GET, POST, PATCH, OPTIONS"}});
  server.Options(".*", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

  server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
    send_json(res, 200, Json{{"status", "ok"}});
  });

  server.Post("/personas", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                Json body = parse_body(req);
                auto guidance = guidance_from_json(body.contains("guidance") ? body.at("guidance") : body);
                auto id = service.create_persona(guidance);
                res.set_header("Location", "/personas/" + id);
                send_json(res, 202, record_to_json(service.get(id)));
              }));

  server.Get("/personas", guarded([&service](const httplib::Request&, httplib::Response& res) {
               Json list = Json::array();
               for (const auto& r : service.list()) list.push_back(record_to_json(r));
               send_json(res, 200, Json{{"personas", std::move(list)}});
             }));

  server.Get(R"(/personas/([^/]+))", guarded([&service](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, record_to_json(service.get(req.matches[1])));
             }));

  server.Patch(R"(/personas/([^/]+)/attributes)",
               guarded([&service](const httplib::Request& req, httplib::Response& res) {
                 Json patch = parse_body(req);
                 if (patch.contains("attributes")) patch = patch.at("attributes");
                 send_json(res, 200, record_to_json(service.update_attributes(req.matches[1], patch)));
               }));

  server.Post(R"(/personas/([^/]+)/stages/([^/]+))",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                auto stage = parse_stage(std::string(req.matches[2]));
                if (!stage) throw Error(ErrorCode::PreconditionFailed, "unknown stage " + std::string(req.matches[2]));
                send_json(res, 200, record_to_json(service.regenerate_stage(req.matches[1], *stage)));
              }));

  server.Post(R"(/personas/([^/]+)/activate)",
              guarded([&service](const httplib::Request& req, httplib::Response& res) {
                Json body = parse_body(req);
                auto result = service.activate(req.matches[1], body.value("driver", std::string()));
                send_json(res, 200,
                          Json{{"plan", plan_to_json(result.plan)}, {"log", execution_log_to_json(result.log)}});
              }));

  server.Post("/deactivate", guarded([&service](const httplib::Request&, httplib::Response& res) {
                send_json(res, 200, Json{{"id", service.deactivate()}});
              }));

  server.Get(R"(/personas/([^/]+)/violations)",
             guarded([&service](const httplib::Request& req, httplib::Response& res) {
               auto violations = service.violations(req.matches[1]);
               Json list = Json::array();
               int hard = 0;
               for (const auto& v : violations) {
                 list.push_back(violation_json(v));
                 hard += v.severity == Severity::Hard ? 1 : 0;
               }
               send_json(res, 200,
                         Json{{"violations", std::move(list)},
                              {"hard", hard},
                              {"advisory", static_cast<int>(violations.size()) - hard}});
             }));

  server.Post("/observations", guarded([&service](const httplib::Request& req, httplib::Response& res) {
                Json body = parse_body(req);
                const Json& rows = body.is_array() ? body : body.value("observations", Json::array());
                if (!rows.is_array()) throw Error(ErrorCode::ParseFailed, "observations must be an array");
                std::vector<AdObservation> batch;
                for (const auto& row : rows) batch.push_back(observation_from_json(row));
                send_json(res, 200, Json{{"ingested", service.record_observations(batch)}});
              }));

  server.Get("/reports/overlap", guarded([&service](const httplib::Request& req, httplib::Response& res) {
               auto report = service.overlap_report();
               if (req.get_param_value("format") == "table") {
                 res.set_content(render_report_table(report), "text/plain");
               } else {
                 send_json(res, 200, report_to_json(report));
               }
             }));
}

ApiServer::ApiServer(PersonaService& service, std::string host, int port)
    : server_(std::make_unique<httplib::Server>()), host_(std::move(host)) {
  register_routes(*server_, service);
  if (port == 0) {
    port_ = server_->bind_to_any_port(host_);
  } else {
    port_ = server_->bind_to_port(host_, port) ? port : -1;
  }
  if (port_ <= 0) throw Error(ErrorCode::IoFailure, "cannot listen on " + host_ + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

ApiServer::~ApiServer() { stop(); }

void ApiServer::wait() {
  if (thread_.joinable()) thread_.join();
}

void ApiServer::stop() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace sandbox
