#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sandbox {

/// A prompt body with {{slot}} markers. The {{examples}} slot, when present,
/// is filled with the few-shot examples joined by blank lines.
struct PromptTemplate {
  std::string name;
  std::string body;
  std::vector<std::string> few_shot_examples;
  std::string version;

  std::vector<std::string> slots() const;

  /// Literal text between slot markers, in order, with empty pieces dropped.
  std::vector<std::string> fragments() const;

  /// Throws PreconditionFailed when a value names a slot the body lacks or a
  /// slot is left without a value.
  std::string render(const std::map<std::string, std::string>& values) const;
};

struct EmbeddedTemplateFile {
  std::string_view path;  // "<set>/<name>.txt" or "<set>/examples/<name>.<n>.txt"
  std::string_view content;
};

std::span<const EmbeddedTemplateFile> embedded_template_files();

/// The eight stage templates of one version ("v1" or "baseline").
class TemplateSet {
 public:
  static TemplateSet builtin(std::string_view version = "v1");
  /// Reads <dir>/<name>.txt and <dir>/examples/<name>.<n>.txt files.
  static TemplateSet load(const std::filesystem::path& dir, std::string version);

  const PromptTemplate& get(std::string_view name) const;
  const std::string& version() const { return version_; }
  std::vector<std::string> names() const;

 private:
  static TemplateSet from_files(const std::map<std::string, std::string>& files, std::string version);

  std::string version_;
  std::map<std::string, PromptTemplate, std::less<>> templates_;
};

inline constexpr std::string_view kTemplateNames[] = {
    "description", "attributes", "portrait_prompt", "device",
    "schedule",    "browsing",   "posts",           "post_image"};

}  // namespace sandbox
