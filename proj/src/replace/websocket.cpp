#include "sandbox/replace/websocket.hpp"

#include <netdb.h>
#include <openssl/evp.h>
#include <openssl/rand.h>
#include <sys/socket.h>
#include <sys/time.h>
#include <unistd.h>

#include <array>
#include <cstring>

#include <httplib.h>

namespace sandbox {
namespace {

constexpr std::string_view kHandshakeGuid = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11";

std::string base64(const unsigned char* data, std::size_t n) {
  std::string out(4 * ((n + 2) / 3), '\0');
  int len = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(n));
  out.resize(static_cast<std::size_t>(len));
  return out;
}

void write_all(int fd, const char* data, std::size_t n) {
  while (n > 0) {
    ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
    if (w <= 0) throw Error(ErrorCode::DriverDisconnected, "websocket write failed");
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

}  // namespace

WebSocketUrl parse_websocket_url(std::string_view url) {
  constexpr std::string_view kScheme = "ws://";
  if (url.substr(0, kScheme.size()) != kScheme) {
    throw Error(ErrorCode::PreconditionFailed, "expected a ws:// URL, got " + std::string(url));
  }
  url.remove_prefix(kScheme.size());
  WebSocketUrl out;
  auto slash = url.find('/');
  std::string_view authority = url.substr(0, slash);
  if (slash != std::string_view::npos) out.path = std::string(url.substr(slash));
  auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    out.host = std::string(authority.substr(0, colon));
    try {
      out.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::PreconditionFailed, "bad port in " + std::string(url));
    }
  } else {
    out.host = std::string(authority);
  }
  if (out.host.empty()) throw Error(ErrorCode::PreconditionFailed, "missing host in websocket URL");
  return out;
}

std::string websocket_accept_key(std::string_view key) {
  std::string input = std::string(key) + std::string(kHandshakeGuid);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(input.data(), input.size(), digest.data(), &len, EVP_sha1(), nullptr);
  return base64(digest.data(), len);
}

WebSocketDevToolsTransport::WebSocketDevToolsTransport(std::string_view url, std::chrono::milliseconds timeout) {
  auto target = parse_websocket_url(url);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (getaddrinfo(target.host.c_str(), std::to_string(target.port).c_str(), &hints, &found) != 0) {
    throw Error(ErrorCode::DriverDisconnected, "cannot resolve " + target.host);
  }
  for (addrinfo* a = found; a && fd_ < 0; a = a->ai_next) {
    int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, a->ai_addr, a->ai_addrlen) == 0) {
      fd_ = fd;
    } else {
      ::close(fd);
    }
  }
  freeaddrinfo(found);
  if (fd_ < 0) throw Error(ErrorCode::DriverDisconnected, "cannot connect to " + std::string(url));

  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  setsockopt(fd_, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  setsockopt(fd_, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);

  std::array<unsigned char, 16> nonce{};
  RAND_bytes(nonce.data(), static_cast<int>(nonce.size()));
  std::string key = base64(nonce.data(), nonce.size());
  std::string request = "GET " + target.path + " HTTP/1.1\r\nHost: " + target.host + ":" +
                        std::to_string(target.port) +
                        "\r\nUpgrade: websocket\r\nConnection: Upgrade\r\nSec-WebSocket-Key: " + key +
                        "\r\nSec-WebSocket-Version: 13\r\n\r\n";
  try {
    write_all(fd_, request.data(), request.size());
    std::string response;
    char chunk[1024];
    while (response.find("\r\n\r\n") == std::string::npos) {
      ssize_t n = ::recv(fd_, chunk, sizeof chunk, 0);
      if (n <= 0) lost("handshake interrupted");
      response.append(chunk, static_cast<std::size_t>(n));
      if (response.size() > 64 * 1024) lost("handshake response too large");
    }
    auto end = response.find("\r\n\r\n") + 4;
    buffered_ = response.substr(end);
    std::string head = response.substr(0, end);
    if (head.rfind("HTTP/1.1 101", 0) != 0) lost("handshake rejected: " + head.substr(0, head.find('\r')));
    std::string accept = websocket_accept_key(key);
    std::string lowered = head;
    for (auto& c : lowered) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    auto pos = lowered.find("sec-websocket-accept:");
    if (pos == std::string::npos) lost("handshake missing Sec-WebSocket-Accept");
    auto value_start = head.find_first_not_of(' ', pos + 21);
    auto value = head.substr(value_start, head.find('\r', value_start) - value_start);
    if (value != accept) lost("handshake accept key mismatch");
  } catch (...) {
    close_socket();
    throw;
  }
}

WebSocketDevToolsTransport::~WebSocketDevToolsTransport() {
  if (fd_ >= 0) {
    try {
      write_frame(0x8, {});
    } catch (const Error&) {
    }
  }
  close_socket();
}

void WebSocketDevToolsTransport::close_socket() {
  if (fd_ >= 0) ::close(fd_);
  fd_ = -1;
}

void WebSocketDevToolsTransport::lost(const std::string& why) {
  close_socket();
  throw Error(ErrorCode::DriverDisconnected, "devtools session: " + why);
}

void WebSocketDevToolsTransport::write_frame(int opcode, std::string_view payload) {
  std::string frame;
  frame += static_cast<char>(0x80 | opcode);
  std::size_t n = payload.size();
  if (n < 126) {
    frame += static_cast<char>(0x80 | n);
  } else if (n <= 0xFFFF) {
    frame += static_cast<char>(0x80 | 126);
    frame += static_cast<char>((n >> 8) & 0xFF);
    frame += static_cast<char>(n & 0xFF);
  } else {
    frame += static_cast<char>(0x80 | 127);
    for (int shift = 56; shift >= 0; shift -= 8) frame += static_cast<char>((n >> shift) & 0xFF);
  }
  std::array<unsigned char, 4> mask{};
  RAND_bytes(mask.data(), 4);
  frame.append(reinterpret_cast<const char*>(mask.data()), 4);
  for (std::size_t i = 0; i < n; ++i) frame += static_cast<char>(payload[i] ^ mask[i % 4]);
  try {
    write_all(fd_, frame.data(), frame.size());
  } catch (const Error&) {
    lost("write failed");
  }
}

void WebSocketDevToolsTransport::read_exact(char* out, std::size_t n) {
  std::size_t from_buffer = std::min(n, buffered_.size());
  std::memcpy(out, buffered_.data(), from_buffer);
  buffered_.erase(0, from_buffer);
  out += from_buffer;
  n -= from_buffer;
  while (n > 0) {
    ssize_t r = ::recv(fd_, out, n, 0);
    if (r <= 0) lost(r == 0 ? "connection closed" : "read failed or timed out");
    out += r;
    n -= static_cast<std::size_t>(r);
  }
}

std::string WebSocketDevToolsTransport::read_message() {
  std::string message;
  for (;;) {
    unsigned char head[2];
    read_exact(reinterpret_cast<char*>(head), 2);
    bool fin = head[0] & 0x80;
    int opcode = head[0] & 0x0F;
    bool masked = head[1] & 0x80;
    std::uint64_t len = head[1] & 0x7F;
    if (len == 126 || len == 127) {
      unsigned char ext[8];
      std::size_t bytes = len == 126 ? 2 : 8;
      read_exact(reinterpret_cast<char*>(ext), bytes);
      len = 0;
      for (std::size_t i = 0; i < bytes; ++i) len = (len << 8) | ext[i];
    }
    if (len > (64u << 20)) lost("frame too large");
    unsigned char mask[4] = {0, 0, 0, 0};
    if (masked) read_exact(reinterpret_cast<char*>(mask), 4);
    std::string payload(static_cast<std::size_t>(len), '\0');
    if (len > 0) read_exact(payload.data(), payload.size());
    if (masked) {
      for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<char>(payload[i] ^ mask[i % 4]);
    }
    switch (opcode) {
      case 0x8:
        lost("closed by peer");
      case 0x9:
        write_frame(0xA, payload);
        continue;
      case 0xA:
        continue;
      default:
        message += payload;
    }
    if (fin) return message;
  }
}

Json WebSocketDevToolsTransport::send(const std::string& method, const Json& params) {
  std::lock_guard lock(mutex_);
  if (fd_ < 0) throw Error(ErrorCode::DriverDisconnected, "devtools session is closed");
  std::int64_t id = next_id_++;
  write_frame(0x1, Json{{"id", id}, {"method", method}, {"params", params}}.dump());
  for (;;) {
    auto text = read_message();
    auto message = Json::parse(text, nullptr, false);
    if (message.is_discarded()) continue;
    if (message.contains("id") && message["id"] == id) return message;
  }
}

std::string devtools_page_url(const std::string& http_endpoint) {
  httplib::Client client(http_endpoint);
  client.set_connection_timeout(5);
  auto res = client.Get("/json/list");
  if (!res || res->status != 200) {
    throw Error(ErrorCode::DriverDisconnected, "no DevTools endpoint at " + http_endpoint);
  }
  auto targets = Json::parse(res->body, nullptr, false);
  if (targets.is_array()) {
    for (const auto& t : targets) {
      if (t.value("type", "") == "page" && t.contains("webSocketDebuggerUrl")) {
        return t["webSocketDebuggerUrl"].get<std::string>();
      }
    }
  }
  throw Error(ErrorCode::DriverDisconnected, "no page target at " + http_endpoint);
}

}  // namespace sandbox
