#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string_view>

namespace bugloc {

/// Returns the first balanced `{...}` span in `raw` that parses as a JSON
/// object. Surrounding prose and markdown code fences are ignored.
std::optional<nlohmann::json> extract_first_json_object(std::string_view raw);

}  // namespace bugloc
