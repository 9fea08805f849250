#pragma once

#include <string_view>

#include "sandbox/core/attributes.hpp"

namespace sandbox {

/// Extracts the first JSON value from raw model output. Tolerates prose
/// around the value, ``` fences, single- or back-quoted strings, curly
/// double quotes, trailing commas, bare object keys and a sequence of
/// top-level objects (collected into an array). Throws ParseFailed.
Json parse_lenient_json(std::string_view text);

}  // namespace sandbox
