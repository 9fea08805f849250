#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

#include "sandbox/providers/retry.hpp"

namespace sandbox {

struct TextGenerationRequest {
  std::string prompt;
  int max_tokens = 4500;
  double temperature = 0.9;
};

/// Throws PreconditionFailed for an empty prompt, non-positive token budget
/// or a temperature outside [0, 2].
void check_request(const TextGenerationRequest& request);

class TextProvider {
 public:
  virtual ~TextProvider() = default;

  /// Raw completion text for the prompt.
  virtual std::string generate_text(const TextGenerationRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// SHA-256 of the prompt after trimming and LF normalization.
std::string fixture_key(std::string_view prompt);

/// Directory of {hash}.txt response files plus an index.json manifest.
/// Thread-safe; lookups after load never mutate.
class FixtureStore {
 public:
  struct Entry {
    std::string label;
    std::string preview;
  };

  explicit FixtureStore(std::filesystem::path dir);

  const std::filesystem::path& dir() const { return dir_; }
  std::optional<std::string> lookup(const std::string& key) const;
  void put(std::string_view prompt, std::string_view response, std::string label = {});
  std::size_t size() const;

 private:
  void write_index() const;

  std::filesystem::path dir_;
  mutable std::mutex mutex_;
  std::map<std::string, Entry> index_;
};

class ReplayTextProvider : public TextProvider {
 public:
  explicit ReplayTextProvider(std::filesystem::path fixture_dir);

  std::string generate_text(const TextGenerationRequest& request) override;
  std::string id() const override { return "replay"; }

 private:
  FixtureStore store_;
};

/// Forwards to `inner` and saves every prompt/response pair as a fixture.
class RecordingTextProvider : public TextProvider {
 public:
  RecordingTextProvider(TextProvider& inner, std::filesystem::path fixture_dir);

  std::string generate_text(const TextGenerationRequest& request) override;
  std::string id() const override { return inner_.id(); }

  /// Label attached to the next recorded fixtures (index manifest only).
  void set_label(std::string label);

 private:
  TextProvider& inner_;
  FixtureStore store_;
  std::mutex mutex_;
  std::string label_;
};

class CallbackTextProvider : public TextProvider {
 public:
  using Callback = std::function<std::string(const TextGenerationRequest&)>;

  explicit CallbackTextProvider(Callback callback, std::string id = "callback")
      : callback_(std::move(callback)), id_(std::move(id)) {}

  std::string generate_text(const TextGenerationRequest& request) override {
    check_request(request);
    return callback_(request);
  }
  std::string id() const override { return id_; }

 private:
  Callback callback_;
  std::string id_;
};

class RetryingTextProvider : public TextProvider {
 public:
  RetryingTextProvider(TextProvider& inner, RetryPolicy policy = {})
      : inner_(inner), policy_(std::move(policy)) {}

  std::string generate_text(const TextGenerationRequest& request) override {
    return with_retries(policy_, [&] { return inner_.generate_text(request); });
  }
  std::string id() const override { return inner_.id(); }

 private:
  TextProvider& inner_;
  RetryPolicy policy_;
};

/// Chat-completions client. Reads the key from OPENAI_API_KEY; the key is
/// never written to logs or error messages.
class OpenAiTextProvider : public TextProvider {
 public:
  struct Options {
    std::string base_url = "https://api.openai.com";
    std::string model = "gpt-4";
    std::string api_key;
    int timeout_seconds = 120;
  };

  explicit OpenAiTextProvider(Options options);
  /// Options from OPENAI_API_KEY, SANDBOX_OPENAI_BASE_URL, SANDBOX_OPENAI_MODEL.
  static Options options_from_env();

  std::string generate_text(const TextGenerationRequest& request) override;
  std::string id() const override { return "openai:" + options_.model; }

 private:
  Options options_;
};

}  // namespace sandbox
