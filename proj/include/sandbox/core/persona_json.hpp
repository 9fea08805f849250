#pragma once

#include <string>
#include <string_view>

#include "sandbox/core/attributes.hpp"
#include "sandbox/core/types.hpp"

namespace sandbox {

Json guidance_to_json(const GenerationGuidance& guidance);
/// Throws PreconditionFailed on malformed input; range rules are checked by
/// check_guidance, not here.
GenerationGuidance guidance_from_json(const Json& json);

Json device_to_json(const DeviceEnvironment& device);
DeviceEnvironment device_from_json(const Json& json);

Json schedule_to_json(const std::vector<ScheduleEvent>& events);
std::vector<ScheduleEvent> schedule_from_json(const Json& json);

Json browsing_to_json(const std::vector<BrowsingEntry>& entries);
std::vector<BrowsingEntry> browsing_from_json(const Json& json);

Json post_to_json(const SocialPost& post);
SocialPost post_from_json(const Json& json);

Json persona_to_json(const PersonaProfile& persona);
PersonaProfile persona_from_json(const Json& json);

/// Persona export document: stable key order, two-space indent.
std::string export_persona(const PersonaProfile& persona);
PersonaProfile import_persona(std::string_view text);

}  // namespace sandbox
