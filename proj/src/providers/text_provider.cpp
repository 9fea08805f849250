#include "sandbox/providers/text_provider.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "sandbox/core/error.hpp"
#include "sandbox/core/text.hpp"
#include "sandbox/providers/sha256.hpp"

namespace sandbox {
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view data) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write " + tmp.string());
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
  }
  fs::rename(tmp, path);
}

std::string preview_of(std::string_view prompt) {
  std::string flat = first_words(prompt, 16);
  if (flat.size() > 120) flat.resize(120);
  return flat;
}

}  // namespace

void check_request(const TextGenerationRequest& request) {
  require(!trim(request.prompt).empty(), "prompt must not be empty");
  require(request.max_tokens > 0, "max_tokens must be positive");
  require(request.temperature >= 0.0 && request.temperature <= 2.0, "temperature must be within [0, 2]");
}

std::string fixture_key(std::string_view prompt) { return sha256_hex(normalize_prompt(prompt)); }

FixtureStore::FixtureStore(fs::path dir) : dir_(std::move(dir)) {
  auto index_path = dir_ / "index.json";
  if (!fs::exists(index_path)) return;
  auto index = nlohmann::json::parse(read_file(index_path), nullptr, false);
  if (index.is_discarded() || !index.contains("fixtures")) {
    throw Error(ErrorCode::IoFailure, "malformed fixture index " + index_path.string());
  }
  for (const auto& [key, entry] : index["fixtures"].items()) {
    index_[key] = Entry{entry.value("label", std::string{}), entry.value("preview", std::string{})};
  }
}

std::optional<std::string> FixtureStore::lookup(const std::string& key) const {
  auto path = dir_ / (key + ".txt");
  std::lock_guard lock(mutex_);
  if (!fs::exists(path)) return std::nullopt;
  return read_file(path);
}

void FixtureStore::put(std::string_view prompt, std::string_view response, std::string label) {
  auto key = fixture_key(prompt);
  std::lock_guard lock(mutex_);
  fs::create_directories(dir_);
  write_file(dir_ / (key + ".txt"), response);
  index_[key] = Entry{std::move(label), preview_of(prompt)};
  write_index();
}

std::size_t FixtureStore::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

void FixtureStore::write_index() const {
  nlohmann::ordered_json fixtures = nlohmann::ordered_json::object();
  for (const auto& [key, entry] : index_) {
    fixtures[key] = {{"label", entry.label}, {"preview", entry.preview}};
  }
  nlohmann::ordered_json index = {{"format", 1}, {"fixtures", fixtures}};
  write_file(dir_ / "index.json", index.dump(2) + "\n");
}

ReplayTextProvider::ReplayTextProvider(fs::path fixture_dir) : store_(std::move(fixture_dir)) {}

std::string ReplayTextProvider::generate_text(const TextGenerationRequest& request) {
  check_request(request);
  auto key = fixture_key(request.prompt);
  auto response = store_.lookup(key);
  if (!response) {
    throw Error(ErrorCode::FixtureMissing,
                "no replay fixture " + key + " for prompt \"" + preview_of(request.prompt) + "\"");
  }
  return *response;
}

RecordingTextProvider::RecordingTextProvider(TextProvider& inner, fs::path fixture_dir)
    : inner_(inner), store_(std::move(fixture_dir)) {}

std::string RecordingTextProvider::generate_text(const TextGenerationRequest& request) {
  auto response = inner_.generate_text(request);
  std::string label;
  {
    std::lock_guard lock(mutex_);
    label = label_;
  }
  store_.put(request.prompt, response, label);
  spdlog::debug("recorded fixture {}", fixture_key(request.prompt));
  return response;
}

void RecordingTextProvider::set_label(std::string label) {
  std::lock_guard lock(mutex_);
  label_ = std::move(label);
}

}  // namespace sandbox
