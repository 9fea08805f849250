#include "sandbox/pipeline/templates.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "sandbox/core/error.hpp"

namespace sandbox {
namespace {

constexpr std::string_view kOpen = "{{";
constexpr std::string_view kClose = "}}";

std::string strip_final_newline(std::string text) {
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  return text;
}

}  // namespace

std::vector<std::string> PromptTemplate::slots() const {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = body.find(kOpen, pos)) != std::string::npos) {
    auto end = body.find(kClose, pos);
    if (end == std::string::npos) break;
    out.push_back(body.substr(pos + kOpen.size(), end - pos - kOpen.size()));
    pos = end + kClose.size();
  }
  return out;
}

std::vector<std::string> PromptTemplate::fragments() const {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    auto open = body.find(kOpen, pos);
    auto piece = body.substr(pos, open == std::string::npos ? std::string::npos : open - pos);
    if (!piece.empty()) out.push_back(piece);
    if (open == std::string::npos) break;
    auto close = body.find(kClose, open);
    if (close == std::string::npos) break;
    pos = close + kClose.size();
  }
  return out;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  auto names = slots();
  std::set<std::string> known(names.begin(), names.end());
  for (const auto& [key, value] : values) {
    if (!known.contains(key)) {
      throw Error(ErrorCode::PreconditionFailed, "template " + name + " has no slot {{" + key + "}}");
    }
  }
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = body.find(kOpen, pos);
    if (open == std::string::npos) {
      out.append(body, pos);
      break;
    }
    auto close = body.find(kClose, open);
    out.append(body, pos, open - pos);
    std::string slot = body.substr(open + kOpen.size(), close - open - kOpen.size());
    if (auto it = values.find(slot); it != values.end()) {
      out += it->second;
    } else if (slot == "examples") {
      for (std::size_t i = 0; i < few_shot_examples.size(); ++i) {
        if (i) out += "\n\n";
        out += few_shot_examples[i];
      }
    } else {
      throw Error(ErrorCode::PreconditionFailed, "template " + name + " slot {{" + slot + "}} has no value");
    }
    pos = close + kClose.size();
  }
  return out;
}

TemplateSet TemplateSet::from_files(const std::map<std::string, std::string>& files, std::string version) {
  TemplateSet set;
  set.version_ = std::move(version);
  for (auto name : kTemplateNames) {
    auto it = files.find(std::string(name) + ".txt");
    if (it == files.end()) {
      throw Error(ErrorCode::IoFailure,
                  "template set " + set.version_ + " is missing " + std::string(name) + ".txt");
    }
    PromptTemplate t{std::string(name), strip_final_newline(it->second), {}, set.version_};
    // Examples are numbered from 1; std::map keeps them ordered for n < 10.
    std::string prefix = "examples/" + std::string(name) + ".";
    for (const auto& [path, content] : files) {
      if (path.starts_with(prefix)) t.few_shot_examples.push_back(strip_final_newline(content));
    }
    set.templates_.emplace(std::string(name), std::move(t));
  }
  return set;
}

TemplateSet TemplateSet::builtin(std::string_view version) {
  std::map<std::string, std::string> files;
  std::string prefix = std::string(version) + "/";
  for (const auto& file : embedded_template_files()) {
    if (file.path.starts_with(prefix)) {
      files.emplace(std::string(file.path.substr(prefix.size())), std::string(file.content));
    }
  }
  if (files.empty()) throw Error(ErrorCode::NotFound, "no built-in template set \"" + std::string(version) + "\"");
  return from_files(files, std::string(version));
}

TemplateSet TemplateSet::load(const std::filesystem::path& dir, std::string version) {
  std::map<std::string, std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files.emplace(std::filesystem::relative(entry.path(), dir).generic_string(), ss.str());
  }
  return from_files(files, std::move(version));
}

const PromptTemplate& TemplateSet::get(std::string_view name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(ErrorCode::NotFound, "no template named " + std::string(name));
  return it->second;
}

std::vector<std::string> TemplateSet::names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : templates_) out.push_back(name);
  return out;
}

}  // namespace sandbox
