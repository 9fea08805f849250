#pragma once

#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sandbox/core/json.hpp"
#include "sandbox/pipeline/templates.hpp"
#include "sandbox/providers/text_provider.hpp"

namespace sandbox {

/// Name of the template whose literal fragments all occur, in order, in
/// the prompt. The longest match wins when several fit.
std::optional<std::string> classify_prompt(const TemplateSet& templates, std::string_view prompt);

/// Answers each prompt with the next queued response for the template it
/// was rendered from. Used to author replay fixtures and in tests. Throws
/// FixtureMissing when a template has no response left.
class ScriptedTextProvider : public TextProvider {
 public:
  ScriptedTextProvider(TemplateSet templates, std::map<std::string, std::deque<std::string>> responses,
                       std::string id = "scripted");

  /// {"description": "text" | ["first", "second", ...], ...}
  static std::map<std::string, std::deque<std::string>> responses_from_json(const Json& json);

  std::string generate_text(const TextGenerationRequest& request) override;
  std::string id() const override { return id_; }

  /// Template names in call order.
  std::vector<std::string> calls() const;

 private:
  TemplateSet templates_;
  std::map<std::string, std::deque<std::string>> responses_;
  std::string id_;
  mutable std::mutex mutex_;
  std::vector<std::string> calls_;
};

}  // namespace sandbox
