#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace sandbox {

/// Fills the bundled browser/platform template table. Returns std::nullopt
/// for a browser the table does not know.
std::optional<std::string> compose_user_agent(std::string_view browser, std::string_view device);

}  // namespace sandbox
