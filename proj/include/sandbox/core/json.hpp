#pragma once

#include <nlohmann/json.hpp>

namespace sandbox {

// Insertion-ordered so exported documents keep a stable key order.
using Json = nlohmann::ordered_json;

}  // namespace sandbox
