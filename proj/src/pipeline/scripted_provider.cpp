#include "sandbox/pipeline/scripted_provider.hpp"

namespace sandbox {

std::optional<std::string> classify_prompt(const TemplateSet& templates, std::string_view prompt) {
  std::optional<std::string> best;
  std::size_t best_len = 0;
  for (const auto& name : templates.names()) {
    std::size_t pos = 0;
    std::size_t total = 0;
    bool all = true;
    for (const auto& fragment : templates.get(name).fragments()) {
      auto hit = prompt.find(fragment, pos);
      if (hit == std::string_view::npos) {
        all = false;
        break;
      }
      pos = hit + fragment.size();
      total += fragment.size();
    }
    if (all && total > best_len) {
      best = name;
      best_len = total;
    }
  }
  return best;
}

ScriptedTextProvider::ScriptedTextProvider(TemplateSet templates,
                                           std::map<std::string, std::deque<std::string>> responses, std::string id)
    : templates_(std::move(templates)), responses_(std::move(responses)), id_(std::move(id)) {}

std::map<std::string, std::deque<std::string>> ScriptedTextProvider::responses_from_json(const Json& json) {
  std::map<std::string, std::deque<std::string>> out;
  if (!json.is_object()) throw Error(ErrorCode::ParseFailed, "response script must be an object");
  for (const auto& [name, value] : json.items()) {
    if (value.is_string()) {
      out[name].push_back(value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& v : value) out[name].push_back(v.get<std::string>());
    } else {
      throw Error(ErrorCode::ParseFailed, "script entry " + name + " must be a string or an array of strings");
    }
  }
  return out;
}

std::string ScriptedTextProvider::generate_text(const TextGenerationRequest& request) {
  check_request(request);
  auto name = classify_prompt(templates_, request.prompt);
  if (!name) throw Error(ErrorCode::FixtureMissing, "prompt matches no template");
  std::lock_guard lock(mutex_);
  calls_.push_back(*name);
  auto it = responses_.find(*name);
  if (it == responses_.end() || it->second.empty()) {
    throw Error(ErrorCode::FixtureMissing, "no scripted response left for " + *name);
  }
  auto response = std::move(it->second.front());
  it->second.pop_front();
  return response;
}

std::vector<std::string> ScriptedTextProvider::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

}  // namespace sandbox
