#include "sandbox/pipeline/lenient_json.hpp"

#include <cctype>
#include <string>

#include "sandbox/core/error.hpp"

namespace sandbox {
namespace {

std::string replace_all(std::string text, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = text.find(from, pos)) != std::string::npos) {
    text.replace(pos, from.size(), to);
    pos += to.size();
  }
  return text;
}

// Drops ``` fence lines (with or without a language tag) and normalizes
// curly double quotes.
std::string preprocess(std::string_view raw) {
  std::string out;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t eol = raw.find('\n', i);
    if (eol == std::string_view::npos) eol = raw.size();
    std::string_view line = raw.substr(i, eol - i);
    std::size_t lead = line.find_first_not_of(" \t");
    if (lead != std::string_view::npos && line.substr(lead).starts_with("```")) {
      // fence line: drop it
    } else {
      out.append(line);
      out += '\n';
    }
    i = eol + 1;
  }
  out = replace_all(std::move(out), "\xE2\x80\x9C", "\"");
  out = replace_all(std::move(out), "\xE2\x80\x9D", "\"");
  return out;
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Json parse_document() {
    std::size_t start = text_.find_first_of("[{");
    if (start == std::string_view::npos) fail("no JSON object or array in response");
    pos_ = start;
    Json value = parse_value();
    skip_ws();
    if (value.is_object() && peek() == '{') {
      Json list = Json::array();
      list.push_back(std::move(value));
      while (peek() == '{') {
        list.push_back(parse_value());
        skip_ws();
        if (peek() == ',') {
          ++pos_;
          skip_ws();
        }
      }
      return list;
    }
    return value;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseFailed, what + " (at offset " + std::to_string(pos_) + ")");
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  Json parse_value() {
    skip_ws();
    char c = peek();
    if (c == '{') return parse_object();
    if (c == '[') return parse_array();
    if (c == '"' || c == '\'' || c == '`') return parse_string();
    if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) return parse_number();
    if (text_.substr(pos_).starts_with("true")) {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_).starts_with("false")) {
      pos_ += 5;
      return false;
    }
    if (text_.substr(pos_).starts_with("null")) {
      pos_ += 4;
      return nullptr;
    }
    if (c == '\0') fail("unexpected end of response");
    fail(std::string("unexpected character '") + c + "'");
  }

  Json parse_object() {
    ++pos_;
    Json object = Json::object();
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        return object;
      }
      std::string key = parse_key();
      skip_ws();
      if (peek() != ':') fail("expected ':' after key \"" + key + "\"");
      ++pos_;
      object[key] = parse_value();
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("expected ',' or '}' in object");
      }
    }
  }

  std::string parse_key() {
    char c = peek();
    if (c == '"' || c == '\'' || c == '`') return parse_string().get<std::string>();
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ':' && text_[pos_] != '\n' && text_[pos_] != '}') ++pos_;
    std::string key(text_.substr(start, pos_ - start));
    while (!key.empty() && std::isspace(static_cast<unsigned char>(key.back()))) key.pop_back();
    if (key.empty()) fail("empty object key");
    return key;
  }

  Json parse_array() {
    ++pos_;
    Json array = Json::array();
    while (true) {
      skip_ws();
      if (peek() == ']') {
        ++pos_;
        return array;
      }
      array.push_back(parse_value());
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  // A non-double quote only closes the string when what follows can end a
  // JSON string, so apostrophes inside single-quoted text survive.
  bool closes_here(std::size_t quote_pos) const {
    std::size_t k = quote_pos + 1;
    while (k < text_.size() && (text_[k] == ' ' || text_[k] == '\t' || text_[k] == '\r' || text_[k] == '\n')) ++k;
    if (k >= text_.size()) return true;
    char n = text_[k];
    return n == ',' || n == ']' || n == '}' || n == ':';
  }

  Json parse_string() {
    char quote = text_[pos_++];
    std::string out;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '\\' && pos_ + 1 < text_.size()) {
        char e = text_[pos_ + 1];
        pos_ += 2;
        switch (e) {
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          case 'r': out += '\r'; break;
          case 'b': out += '\b'; break;
          case 'f': out += '\f'; break;
          case 'u': out += parse_unicode_escape(); break;
          default: out += e; break;
        }
        continue;
      }
      if (c == quote && (quote == '"' || closes_here(pos_))) {
        ++pos_;
        return out;
      }
      out += c;
      ++pos_;
    }
    fail("unterminated string");
  }

  std::string parse_unicode_escape() {
    if (pos_ + 4 > text_.size()) fail("truncated \\u escape");
    unsigned code = std::stoul(std::string(text_.substr(pos_, 4)), nullptr, 16);
    pos_ += 4;
    if (code >= 0xD800 && code <= 0xDBFF && text_.substr(pos_).starts_with("\\u")) {
      unsigned low = std::stoul(std::string(text_.substr(pos_ + 2, 4)), nullptr, 16);
      pos_ += 6;
      code = 0x10000 + ((code - 0xD800) << 10) + (low - 0xDC00);
    }
    std::string out;
    if (code < 0x80) {
      out += static_cast<char>(code);
    } else if (code < 0x800) {
      out += static_cast<char>(0xC0 | (code >> 6));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else if (code < 0x10000) {
      out += static_cast<char>(0xE0 | (code >> 12));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    } else {
      out += static_cast<char>(0xF0 | (code >> 18));
      out += static_cast<char>(0x80 | ((code >> 12) & 0x3F));
      out += static_cast<char>(0x80 | ((code >> 6) & 0x3F));
      out += static_cast<char>(0x80 | (code & 0x3F));
    }
    return out;
  }

  Json parse_number() {
    std::size_t start = pos_;
    if (peek() == '-') ++pos_;
    bool fractional = false;
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (std::isdigit(static_cast<unsigned char>(c))) {
        ++pos_;
      } else if (c == '.' || c == 'e' || c == 'E' || ((c == '+' || c == '-') && fractional)) {
        fractional = true;
        ++pos_;
      } else {
        break;
      }
    }
    std::string token(text_.substr(start, pos_ - start));
    try {
      if (!fractional) return std::stoll(token);
      return std::stod(token);
    } catch (const std::exception&) {
      fail("malformed number \"" + token + "\"");
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Json parse_lenient_json(std::string_view text) {
  std::string cleaned = preprocess(text);
  return Parser(cleaned).parse_document();
}

}  // namespace sandbox
