#include <gtest/gtest.h>
#include <httplib.h>
#include <netinet/in.h>
#include <openssl/evp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <thread>

#include "sandbox/replace/websocket.hpp"

using namespace sandbox;

namespace {

std::string sha1_base64(const std::string& input) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(input.data(), input.size(), digest, &len, EVP_sha1(), nullptr);
  std::string out(4 * ((len + 2) / 3) + 1, '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), digest, static_cast<int>(len));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

// One-connection DevTools stand-in: completes the handshake, answers each
// command, and interleaves an event and a ping before every reply.
class FakeDevTools {
 public:
  explicit FakeDevTools(bool bad_accept = false, int close_after = -1)
      : bad_accept_(bad_accept), close_after_(close_after) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
    ::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    ::listen(listen_fd_, 1);
    thread_ = std::thread([this] { serve(); });
  }
  ~FakeDevTools() {
    ::shutdown(listen_fd_, SHUT_RDWR);
    join();
    ::close(listen_fd_);
  }

  // Waits for the client to hang up; after this the recorded fields are stable.
  void join() {
    if (thread_.joinable()) thread_.join();
  }

  std::string url() const { return "ws://127.0.0.1:" + std::to_string(port_) + "/devtools/page/ABC"; }

  std::vector<Json> received;
  std::string request_path;

 private:
  bool read_exact(char* out, std::size_t n) {
    while (n > 0) {
      ssize_t r = ::recv(fd_, out, n, 0);
      if (r <= 0) return false;
      out += r;
      n -= static_cast<std::size_t>(r);
    }
    return true;
  }

  void send_frame(int opcode, const std::string& payload) {
    std::string frame;
    frame += static_cast<char>(0x80 | opcode);
    if (payload.size() < 126) {
      frame += static_cast<char>(payload.size());
    } else {
      frame += static_cast<char>(126);
      frame += static_cast<char>((payload.size() >> 8) & 0xFF);
      frame += static_cast<char>(payload.size() & 0xFF);
    }
    frame += payload;
    ::send(fd_, frame.data(), frame.size(), MSG_NOSIGNAL);
  }

  bool read_frame(std::string& payload) {
    unsigned char head[2];
    if (!read_exact(reinterpret_cast<char*>(head), 2)) return false;
    std::uint64_t len = head[1] & 0x7F;
    if (len == 126) {
      unsigned char ext[2];
      read_exact(reinterpret_cast<char*>(ext), 2);
      len = (ext[0] << 8) | ext[1];
    } else if (len == 127) {
      unsigned char ext[8];
      read_exact(reinterpret_cast<char*>(ext), 8);
      len = 0;
      for (unsigned char b : ext) len = (len << 8) | b;
    }
    unsigned char mask[4];
    if (!(head[1] & 0x80)) return false;  // clients must mask
    read_exact(reinterpret_cast<char*>(mask), 4);
    payload.assign(len, '\0');
    read_exact(payload.data(), len);
    for (std::size_t i = 0; i < len; ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
    return (head[0] & 0x0F) != 0x8;
  }

  void serve() {
    fd_ = ::accept(listen_fd_, nullptr, nullptr);
    if (fd_ < 0) return;
    std::string request;
    char c;
    while (request.find("\r\n\r\n") == std::string::npos && ::recv(fd_, &c, 1, 0) == 1) request += c;
    request_path = request.substr(4, request.find(' ', 4) - 4);
    auto pos = request.find("Sec-WebSocket-Key: ") + 19;
    std::string key = request.substr(pos, request.find("\r\n", pos) - pos);
    std::string accept = sha1_base64(key + "258EAFA5-E914-47DA-95CA-C5AB0DC85B11");
    if (bad_accept_) accept = "AAAA" + accept.substr(4);
    std::string response = "HTTP/1.1 101 Switching Protocols\r\nUpgrade: websocket\r\nConnection: Upgrade\r\n"
                           "Sec-WebSocket-Accept: " + accept + "\r\n\r\n";
    ::send(fd_, response.data(), response.size(), MSG_NOSIGNAL);

    std::string payload;
    int count = 0;
    while (read_frame(payload)) {
      auto message = Json::parse(payload, nullptr, false);
      if (!message.is_object()) continue;  // pong
      received.push_back(message);
      if (count++ == close_after_) {
        send_frame(0x8, "");
        break;
      }
      send_frame(0x1, Json{{"method", "Page.frameNavigated"}, {"params", {{"frame", {{"id", "x"}}}}}}.dump());
      send_frame(0x9, "hi");
      Json reply{{"id", message["id"]}};
      std::string method = message["method"];
      if (method == "Runtime.evaluate") {
        bool found = message["params"]["expression"].get<std::string>().find("Industry") == std::string::npos;
        reply["result"] = {{"result", {{"type", "boolean"}, {"value", found}}}};
      } else if (method == "Emulation.setUserAgentOverride" && message["params"]["userAgent"] == "") {
        reply["error"] = {{"code", -32602}, {"message", "Invalid parameters"}};
      } else {
        reply["result"] = {{"padding", std::string(300, 'p')}};
      }
      send_frame(0x1, reply.dump());
    }
    ::close(fd_);
  }

  bool bad_accept_;
  int close_after_;  // send a close frame instead of the Nth reply
  int listen_fd_ = -1;
  int fd_ = -1;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST(WebSocket, AcceptKeyMatchesProtocolExample) {
  EXPECT_EQ(websocket_accept_key("dGhlIHNhbXBsZSBub25jZQ=="), "s3pPLMBiTxaQ9kYGzzhZRbK+xOo=");
}

TEST(WebSocket, UrlParsing) {
  auto u = parse_websocket_url("ws://127.0.0.1:9222/devtools/page/1");
  EXPECT_EQ(u.host, "127.0.0.1");
  EXPECT_EQ(u.port, 9222);
  EXPECT_EQ(u.path, "/devtools/page/1");
  auto bare = parse_websocket_url("ws://localhost");
  EXPECT_EQ(bare.port, 80);
  EXPECT_EQ(bare.path, "/");
  EXPECT_THROW(parse_websocket_url("wss://x/"), Error);
  EXPECT_THROW(parse_websocket_url("ws://:1/"), Error);
}

TEST(DevTools, DriverSpeaksProtocol) {
  FakeDevTools server;
  {
    WebSocketDevToolsTransport transport(server.url(), std::chrono::seconds(5));
    DevToolsBrowserDriver driver(transport);
    EXPECT_TRUE(driver.connected());
    EXPECT_TRUE(driver.navigate("https://myadcenter.google.com/controls").ok);
    EXPECT_TRUE(driver.find_field("Gender").ok);
    EXPECT_TRUE(driver.set_field("Gender", "male").ok);
    auto missing = driver.find_field("Industry");
    EXPECT_FALSE(missing.ok);
    EXPECT_NE(missing.detail.find("Industry"), std::string::npos);
    EXPECT_TRUE(driver.set_geolocation_override(34.0456, -118.2791, 100).ok);
    std::string long_ua(200, 'u');
    EXPECT_TRUE(driver.set_user_agent_override(long_ua).ok);
    auto rejected = driver.set_user_agent_override("");
    EXPECT_FALSE(rejected.ok);
    EXPECT_NE(rejected.detail.find("Invalid parameters"), std::string::npos);
  }
  server.join();
  EXPECT_EQ(server.request_path, "/devtools/page/ABC");
  std::vector<std::string> methods;
  for (const auto& m : server.received) methods.push_back(m["method"]);
  std::vector<std::string> expected = {"Page.navigate",
                                       "Runtime.evaluate",
                                       "Runtime.evaluate",
                                       "Runtime.evaluate",
                                       "Emulation.setGeolocationOverride",
                                       "Emulation.setUserAgentOverride",
                                       "Emulation.setUserAgentOverride"};
  EXPECT_EQ(methods, expected);
  for (std::size_t i = 0; i < server.received.size(); ++i) EXPECT_EQ(server.received[i]["id"], i + 1);
  EXPECT_EQ(server.received[4]["params"]["latitude"], 34.0456);
  EXPECT_EQ(server.received[5]["params"]["userAgent"], std::string(200, 'u'));
}

TEST(DevTools, CloseFrameDisconnects) {
  FakeDevTools server(false, 1);
  WebSocketDevToolsTransport transport(server.url(), std::chrono::seconds(5));
  DevToolsBrowserDriver driver(transport);
  EXPECT_TRUE(driver.navigate("https://a/").ok);
  try {
    driver.navigate("https://b/");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DriverDisconnected);
  }
  EXPECT_FALSE(driver.connected());
  EXPECT_THROW(driver.navigate("https://c/"), Error);
}

TEST(DevTools, HandshakeChecksAcceptKey) {
  FakeDevTools server(true);
  EXPECT_THROW(WebSocketDevToolsTransport(server.url(), std::chrono::seconds(5)), Error);
}

TEST(DevTools, ConnectFailureIsDisconnect) {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  int port = ntohs(addr.sin_port);
  ::close(fd);
  try {
    WebSocketDevToolsTransport t("ws://127.0.0.1:" + std::to_string(port) + "/", std::chrono::seconds(1));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DriverDisconnected);
  }
}

TEST(DevTools, PageUrlDiscovery) {
  httplib::Server http;
  http.Get("/json/list", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"([{"type": "service_worker", "webSocketDebuggerUrl": "ws://x/sw"},
                        {"type": "page", "webSocketDebuggerUrl": "ws://127.0.0.1:9222/devtools/page/P1"}])",
                    "application/json");
  });
  int port = http.bind_to_any_port("127.0.0.1");
  std::thread t([&] { http.listen_after_bind(); });
  http.wait_until_ready();
  EXPECT_EQ(devtools_page_url("http://127.0.0.1:" + std::to_string(port)), "ws://127.0.0.1:9222/devtools/page/P1");
  http.stop();
  t.join();
  EXPECT_THROW(devtools_page_url("http://127.0.0.1:" + std::to_string(port)), Error);
}

TEST(DevTools, ScriptsQuoteLabels) {
  auto script = DevToolsBrowserDriver::set_field_script("Relationship \"status\"", "it's");
  EXPECT_NE(script.find(R"(Relationship \"status\")"), std::string::npos);
  EXPECT_NE(script.find("value = \"it's\""), std::string::npos);
}
