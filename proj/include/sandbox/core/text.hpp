#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace sandbox {

/// Number of maximal whitespace-separated tokens. Hashtags count as words.
std::size_t word_count(std::string_view text);

/// The first `limit` words of `text`, joined by single spaces.
std::string first_words(std::string_view text, std::size_t limit);

std::vector<std::string> split_words(std::string_view text);
std::string_view trim(std::string_view text);
std::string to_lower(std::string_view text);
bool contains_icase(std::string_view haystack, std::string_view needle);

/// True when the text contains a blank line (two paragraphs or more).
bool has_paragraph_break(std::string_view text);

/// Normalizes line endings to LF and trims surrounding whitespace.
std::string normalize_prompt(std::string_view text);

}  // namespace sandbox
